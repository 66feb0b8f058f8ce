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

#include "mrag/langid.hpp"

#include <unicode/uscript.h>

#include <algorithm>
#include <array>
#include <json.hpp>

#include "mrag/error.hpp"
#include "mrag/http_clients.hpp"
#include "mrag/io.hpp"
#include "mrag/text.hpp"
#include "mrag/wire.hpp"

namespace mrag::langid {

using nlohmann::json;

std::string_view to_string(Method method) { return method == Method::builtin ? "builtin" : "external"; }

std::map<Lang, LatinProfile> load_profiles(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("no langid profile directory at " + dir.string());
  std::map<Lang, LatinProfile> profiles;
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
      throw ConfigError("bad langid profile " + path.string() + ": " + e.what());
    }
    LatinProfile p;
    p.lang = parse_language(obj.at("lang").get<std::string>());
    for (const auto& w : obj.at("stopwords")) p.stopwords.insert(text::lowercase(w.get<std::string>()));
    p.diacritics = text::to_code_points(text::lowercase(obj.value("diacritics", "")));
    profiles[p.lang] = std::move(p);
  }
  return profiles;
}

BuiltinIdentifier::BuiltinIdentifier(std::map<Lang, LatinProfile> profiles) : profiles_(std::move(profiles)) {}

BuiltinIdentifier BuiltinIdentifier::from_directory(const std::filesystem::path& dir) {
  return BuiltinIdentifier(load_profiles(dir));
}

namespace {

enum Group { kHangul, kCjk, kCyrillic, kArabic, kThai, kLatin, kOther, kGroupCount };

}  // namespace

std::map<Lang, double> BuiltinIdentifier::latin_scores(std::string_view input) const {
  auto tokens = text::lexical_tokens(input);
  std::size_t letters = 0;
  std::u32string lowered = text::to_code_points(text::lowercase(input));
  for (char32_t c : lowered) letters += text::is_letter(c);

  std::map<Lang, double> scores;
  for (const auto& [lang, profile] : profiles_) {
    std::size_t stop_hits = 0;
    for (const auto& t : tokens) stop_hits += profile.stopwords.count(t);
    std::size_t marks = 0;
    for (char32_t c : lowered) marks += profile.diacritics.find(c) != std::u32string::npos;
    double score = 0.0;
    if (!tokens.empty()) score += static_cast<double>(stop_hits) / static_cast<double>(tokens.size());
    if (letters) score += kDiacriticWeight * static_cast<double>(marks) / static_cast<double>(letters);
    scores[lang] = score;
  }
  return scores;
}

LangVerdict BuiltinIdentifier::identify(std::string_view input) {
  std::array<std::size_t, kGroupCount> counts{};
  std::size_t kana = 0;
  std::size_t letters = 0;
  for (char32_t c : text::to_code_points(input)) {
    if (!text::is_letter(c)) continue;
    ++letters;
    UErrorCode status = U_ZERO_ERROR;
    auto script = uscript_getScript(static_cast<UChar32>(c), &status);
    switch (script) {
      case USCRIPT_HANGUL: ++counts[kHangul]; break;
      case USCRIPT_HIRAGANA:
      case USCRIPT_KATAKANA:
        ++kana;
        ++counts[kCjk];
        break;
      case USCRIPT_HAN: ++counts[kCjk]; break;
      case USCRIPT_CYRILLIC: ++counts[kCyrillic]; break;
      case USCRIPT_ARABIC: ++counts[kArabic]; break;
      case USCRIPT_THAI: ++counts[kThai]; break;
      case USCRIPT_LATIN: ++counts[kLatin]; break;
      default: ++counts[kOther]; break;
    }
  }
  LangVerdict verdict;
  if (letters < kMinLetters) return verdict;

  auto dominant = static_cast<Group>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  const double share = static_cast<double>(counts[dominant]) / static_cast<double>(letters);
  switch (dominant) {
    case kHangul: return {Lang::ko, share, Method::builtin};
    case kCjk: return {kana > 0 ? Lang::ja : Lang::zh, share, Method::builtin};
    case kCyrillic: return {Lang::ru, share, Method::builtin};
    case kArabic: return {Lang::ar, share, Method::builtin};
    case kThai: return {Lang::th, share, Method::builtin};
    case kOther:
    case kGroupCount: return verdict;
    case kLatin: break;
  }

  auto scores = latin_scores(input);
  double total = 0.0;
  std::optional<Lang> best;
  double best_score = 0.0;
  for (const auto& [lang, score] : scores) {
    total += score;
    if (score > best_score) {
      best_score = score;
      best = lang;
    }
  }
  if (!best || best_score < kMinProfileScore) return verdict;
  return {best, best_score / total, Method::builtin};
}

ExternalIdentifier::ExternalIdentifier(std::shared_ptr<const http::JsonTransport> transport)
    : transport_(std::move(transport)) {}

LangVerdict ExternalIdentifier::identify(std::string_view input) {
  auto body = transport_->post(wire::kIdentifyPath, wire::identify_request(input));
  if (!body.is_object() || !body.contains("lang") || !body["lang"].is_string()) {
    throw ServiceError("malformed identify response: missing 'lang'", false);
  }
  LangVerdict verdict;
  verdict.method = Method::external;
  verdict.lang = try_parse_language(body["lang"].get<std::string>());
  verdict.confidence = body.value("confidence", 0.0);
  return verdict;
}

}  // namespace mrag::langid
