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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "mrag/language.hpp"

namespace mrag::http {
class JsonTransport;
}

namespace mrag::langid {

enum class Method { builtin, external };

std::string_view to_string(Method method);

struct LangVerdict {
  std::optional<Lang> lang;  // nullopt means unknown
  double confidence = 0.0;
  Method method = Method::builtin;

  bool operator==(const LangVerdict&) const = default;
};

class LanguageIdentifier {
 public:
  virtual ~LanguageIdentifier() = default;
  virtual LangVerdict identify(std::string_view text) = 0;
  virtual Method method() const = 0;
};

// Stopword list and diacritic markers for one Latin-script language.
struct LatinProfile {
  Lang lang = Lang::en;
  std::set<std::string> stopwords;
  std::u32string diacritics;
};

// Loads every *.json profile in `dir` ({"lang", "stopwords", "diacritics"}).
std::map<Lang, LatinProfile> load_profiles(const std::filesystem::path& dir);

// Script histogram first: Hangul -> ko, Han/kana -> ja when any kana is
// present else zh, Cyrillic -> ru, Arabic -> ar, Thai -> th. Latin-majority
// text goes to the profile with the best stopword/diacritic score. Fewer
// than kMinLetters letters, or no profile reaching kMinProfileScore, is unknown.
class BuiltinIdentifier : public LanguageIdentifier {
 public:
  static constexpr std::size_t kMinLetters = 5;
  static constexpr double kMinProfileScore = 0.1;
  static constexpr double kDiacriticWeight = 2.0;

  explicit BuiltinIdentifier(std::map<Lang, LatinProfile> profiles);
  static BuiltinIdentifier from_directory(const std::filesystem::path& dir);

  LangVerdict identify(std::string_view text) override;
  Method method() const override { return Method::builtin; }

  // Per-profile scores for Latin text; exposed for diagnostics.
  std::map<Lang, double> latin_scores(std::string_view text) const;

 private:
  std::map<Lang, LatinProfile> profiles_;
};

// Adapter for POST /v1/identify. Codes outside the supported set come back
// as unknown.
class ExternalIdentifier : public LanguageIdentifier {
 public:
  explicit ExternalIdentifier(std::shared_ptr<const http::JsonTransport> transport);

  LangVerdict identify(std::string_view text) override;
  Method method() const override { return Method::external; }

 private:
  std::shared_ptr<const http::JsonTransport> transport_;
};

}  // namespace mrag::langid
