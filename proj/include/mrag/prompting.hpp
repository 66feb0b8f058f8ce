// Copyright 2026 The mrag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrag/clients.hpp"
#include "mrag/corpus.hpp"
#include "mrag/language.hpp"

namespace mrag::prompting {

// The six system-prompt strategies. Labels ending in "(EN)" keep the prompt
// in English; "(UL)" labels are written in the user language.
enum class PromptLabel {
  reply_short_en,
  reply_short_same_lang_en,
  reply_short_in_ul_en,
  reply_short_ul,
  reply_short_in_ul_ul,
  reply_short_in_ul_ne_ul,
};

inline constexpr std::array<PromptLabel, 6> kAllLabels = {
    PromptLabel::reply_short_en,  PromptLabel::reply_short_same_lang_en, PromptLabel::reply_short_in_ul_en,
    PromptLabel::reply_short_ul,  PromptLabel::reply_short_in_ul_ul,     PromptLabel::reply_short_in_ul_ne_ul};

// Display label, e.g. "Reply short in UL (EN)".
std::string_view label_name(PromptLabel label);
PromptLabel parse_label(std::string_view name);

enum class PromptLangRule { english, user_language };

inline constexpr std::string_view kPlaceholder = "{UL}";

struct PromptSpec {
  PromptLabel label = PromptLabel::reply_short_en;
  std::map<Lang, std::string> text_by_lang;
  bool requires_ul_placeholder = false;
  PromptLangRule prompt_lang_rule = PromptLangRule::english;
};

// Language in which `spec` is written for a query in `ul`.
Lang prompt_language(const PromptSpec& spec, Lang ul);

// (prompt language, target language) -> name used to fill {UL}, written in
// the prompt language and inflected to fit its templates.
class LanguageNameCatalog {
 public:
  static LanguageNameCatalog from_file(const std::filesystem::path& path);

  void set(Lang prompt_lang, Lang ul, std::string name);
  std::optional<std::string> find(Lang prompt_lang, Lang ul) const;

 private:
  std::map<std::pair<Lang, Lang>, std::string> names_;
};

class PromptCatalog {
 public:
  // One JSON file per prompt language: {"lang", "status", "prompts": {label: template}}.
  static PromptCatalog from_directory(const std::filesystem::path& dir);

  // Adds a template, checking placeholder hygiene for its label.
  void add(PromptLabel label, Lang lang, std::string text);

  const PromptSpec& spec(PromptLabel label) const;
  // Provenance note of a language file ("frozen", "community-supplied, ...").
  std::string status(Lang lang) const;

  // Fails with ConfigError unless `label` renders for every language in `uls`.
  void validate(PromptLabel label, std::span<const Lang> uls, const LanguageNameCatalog& names) const;

 private:
  std::map<PromptLabel, PromptSpec> specs_;
  std::map<Lang, std::string> status_;
};

// Replaces every {UL} with the language name; never leaves brace tokens.
std::string render_system_prompt(const PromptSpec& spec, Lang ul, const LanguageNameCatalog& names);

// Reranked context for one query, best first.
struct ContextSet {
  std::string query_id;
  std::vector<corpus::Passage> passages;
};

// "Document i: {title}\n{text}" blocks separated by one blank line.
std::string format_context(const ContextSet& ctx);

// System message (when non-empty) then a user message holding the context
// block, a blank line, and the question as the final line.
clients::ChatRequest build_chat(std::string_view system, std::string_view ctx_block, std::string_view question,
                                int max_new_tokens = clients::kDefaultMaxNewTokens);

}  // namespace mrag::prompting
