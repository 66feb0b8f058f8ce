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

#include "mrag/prompting.hpp"

#include <json.hpp>
#include <regex>

#include "mrag/error.hpp"
#include "mrag/io.hpp"

namespace mrag::prompting {

using nlohmann::json;

namespace {

struct LabelInfo {
  PromptLabel label;
  std::string_view name;
  bool requires_placeholder;
  PromptLangRule rule;
};

constexpr std::array<LabelInfo, 6> kLabelInfo = {{
    {PromptLabel::reply_short_en, "Reply short (EN)", false, PromptLangRule::english},
    {PromptLabel::reply_short_same_lang_en, "Reply short in same lang (EN)", false, PromptLangRule::english},
    {PromptLabel::reply_short_in_ul_en, "Reply short in UL (EN)", true, PromptLangRule::english},
    {PromptLabel::reply_short_ul, "Reply short (UL)", false, PromptLangRule::user_language},
    {PromptLabel::reply_short_in_ul_ul, "Reply short in UL (UL)", true, PromptLangRule::user_language},
    {PromptLabel::reply_short_in_ul_ne_ul, "Reply short in UL + NE in UL (UL)", true, PromptLangRule::user_language},
}};

const LabelInfo& info(PromptLabel label) { return kLabelInfo[static_cast<std::size_t>(label)]; }

std::size_t count_placeholders(std::string_view text) {
  std::size_t n = 0;
  for (auto pos = text.find(kPlaceholder); pos != std::string_view::npos;
       pos = text.find(kPlaceholder, pos + kPlaceholder.size())) {
    ++n;
  }
  return n;
}

const std::regex& brace_token() {
  static const std::regex re(R"(\{[^{}]*\})");
  return re;
}

}  // namespace

std::string_view label_name(PromptLabel label) { return info(label).name; }

PromptLabel parse_label(std::string_view name) {
  for (const auto& i : kLabelInfo) {
    if (i.name == name) return i.label;
  }
  throw ConfigError("unknown prompt label '" + std::string(name) + "'");
}

Lang prompt_language(const PromptSpec& spec, Lang ul) {
  return spec.prompt_lang_rule == PromptLangRule::english ? Lang::en : ul;
}

LanguageNameCatalog LanguageNameCatalog::from_file(const std::filesystem::path& path) {
  json obj;
  try {
    obj = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("bad language-name catalog " + path.string() + ": " + e.what());
  }
  LanguageNameCatalog catalog;
  for (const auto& [prompt_code, table] : obj.at("names").items()) {
    auto prompt_lang = parse_language(prompt_code);
    for (const auto& [ul_code, name] : table.items()) {
      catalog.set(prompt_lang, parse_language(ul_code), name.get<std::string>());
    }
  }
  return catalog;
}

void LanguageNameCatalog::set(Lang prompt_lang, Lang ul, std::string name) {
  names_[{prompt_lang, ul}] = std::move(name);
}

std::optional<std::string> LanguageNameCatalog::find(Lang prompt_lang, Lang ul) const {
  auto it = names_.find({prompt_lang, ul});
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

PromptCatalog PromptCatalog::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("no prompt catalog at " + dir.string());
  PromptCatalog catalog;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    json obj;
    try {
      obj = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
      throw ConfigError("bad prompt catalog " + path.string() + ": " + e.what());
    }
    auto lang = parse_language(obj.at("lang").get<std::string>());
    catalog.status_[lang] = obj.value("status", "");
    for (const auto& [label, text] : obj.at("prompts").items()) {
      catalog.add(parse_label(label), lang, text.get<std::string>());
    }
  }
  return catalog;
}

void PromptCatalog::add(PromptLabel label, Lang lang, std::string text) {
  const auto& i = info(label);
  auto placeholders = count_placeholders(text);
  if (i.requires_placeholder && placeholders == 0) {
    throw ConfigError(std::string(i.name) + " (" + std::string(to_string(lang)) + ") lacks the {UL} placeholder");
  }
  if (!i.requires_placeholder && placeholders != 0) {
    throw ConfigError(std::string(i.name) + " (" + std::string(to_string(lang)) + ") must not contain {UL}");
  }
  auto stripped = text;
  for (auto pos = stripped.find(kPlaceholder); pos != std::string::npos; pos = stripped.find(kPlaceholder)) {
    stripped.erase(pos, kPlaceholder.size());
  }
  if (std::regex_search(stripped, brace_token())) {
    throw ConfigError(std::string(i.name) + " (" + std::string(to_string(lang)) + ") has an unknown brace token");
  }
  if (i.rule == PromptLangRule::english && lang != Lang::en) {
    throw ConfigError(std::string(i.name) + " is English-only; got a " + std::string(to_string(lang)) + " template");
  }
  auto& spec = specs_[label];
  spec.label = label;
  spec.requires_ul_placeholder = i.requires_placeholder;
  spec.prompt_lang_rule = i.rule;
  spec.text_by_lang[lang] = std::move(text);
}

const PromptSpec& PromptCatalog::spec(PromptLabel label) const {
  auto it = specs_.find(label);
  if (it == specs_.end()) throw ConfigError("prompt catalog has no entry for " + std::string(label_name(label)));
  return it->second;
}

std::string PromptCatalog::status(Lang lang) const {
  auto it = status_.find(lang);
  return it == status_.end() ? std::string() : it->second;
}

void PromptCatalog::validate(PromptLabel label, std::span<const Lang> uls, const LanguageNameCatalog& names) const {
  const auto& s = spec(label);
  for (Lang ul : uls) {
    auto prompt_lang = prompt_language(s, ul);
    if (!s.text_by_lang.count(prompt_lang)) {
      throw ConfigError(std::string(label_name(label)) + " has no " + std::string(to_string(prompt_lang)) +
                        " translation");
    }
    if (s.requires_ul_placeholder && !names.find(prompt_lang, ul)) {
      throw ConfigError("language-name catalog lacks (" + std::string(to_string(prompt_lang)) + ", " +
                        std::string(to_string(ul)) + ")");
    }
  }
}

std::string render_system_prompt(const PromptSpec& spec, Lang ul, const LanguageNameCatalog& names) {
  auto prompt_lang = prompt_language(spec, ul);
  auto it = spec.text_by_lang.find(prompt_lang);
  if (it == spec.text_by_lang.end()) {
    throw ConfigError(std::string(label_name(spec.label)) + " has no " + std::string(to_string(prompt_lang)) +
                      " translation");
  }
  std::string out = it->second;
  if (spec.requires_ul_placeholder) {
    auto name = names.find(prompt_lang, ul);
    if (!name) {
      throw ConfigError("language-name catalog lacks (" + std::string(to_string(prompt_lang)) + ", " +
                        std::string(to_string(ul)) + ")");
    }
    for (auto pos = out.find(kPlaceholder); pos != std::string::npos;
         pos = out.find(kPlaceholder, pos + name->size())) {
      out.replace(pos, kPlaceholder.size(), *name);
    }
  }
  if (std::regex_search(out, brace_token())) {
    throw ConfigError("rendered prompt still contains a brace token: " + out);
  }
  return out;
}

std::string format_context(const ContextSet& ctx) {
  std::string out;
  for (std::size_t i = 0; i < ctx.passages.size(); ++i) {
    if (i) out += "\n\n";
    out += "Document " + std::to_string(i + 1) + ": " + ctx.passages[i].title + "\n" + ctx.passages[i].text;
  }
  return out;
}

clients::ChatRequest build_chat(std::string_view system, std::string_view ctx_block, std::string_view question,
                                int max_new_tokens) {
  if (question.empty()) throw PreconditionError("build_chat: empty question");
  clients::ChatRequest req;
  req.max_new_tokens = max_new_tokens;
  req.greedy = true;
  if (!system.empty()) req.messages.push_back({clients::Role::system, std::string(system)});
  std::string user;
  if (!ctx_block.empty()) {
    user.append(ctx_block);
    user.append("\n\n");
  }
  user.append(question);
  req.messages.push_back({clients::Role::user, std::move(user)});
  return req;
}

}  // namespace mrag::prompting
