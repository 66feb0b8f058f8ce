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

#include "mrag/language.hpp"

#include "mrag/error.hpp"

namespace mrag {

namespace {

constexpr std::array<std::string_view, 13> kCodes = {"en", "ar", "es", "fi", "fr", "de", "ja",
                                                     "it", "ko", "pt", "ru", "th", "zh"};

}  // namespace

std::string_view to_string(Lang lang) { return kCodes[static_cast<std::size_t>(lang)]; }

std::optional<Lang> try_parse_language(std::string_view code) {
  for (std::size_t i = 0; i < kCodes.size(); ++i) {
    if (kCodes[i] == code) return static_cast<Lang>(i);
  }
  return std::nullopt;
}

Lang parse_language(std::string_view code) {
  if (auto lang = try_parse_language(code)) return *lang;
  throw ConfigError("unknown language code '" + std::string(code) + "'");
}

}  // namespace mrag
