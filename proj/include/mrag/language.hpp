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
#include <optional>
#include <string>
#include <string_view>

namespace mrag {

// ISO-639-1 codes of the languages the harness supports.
enum class Lang { en, ar, es, fi, fr, de, ja, it, ko, pt, ru, th, zh };

inline constexpr std::array<Lang, 13> kAllLanguages = {
    Lang::en, Lang::ar, Lang::es, Lang::fi, Lang::fr, Lang::de, Lang::ja,
    Lang::it, Lang::ko, Lang::pt, Lang::ru, Lang::th, Lang::zh};

std::string_view to_string(Lang lang);

std::optional<Lang> try_parse_language(std::string_view code);

// Throws ConfigError for codes outside the supported set.
Lang parse_language(std::string_view code);

// False exactly for the scripts written without spaces between words.
constexpr bool whitespace_separated(Lang lang) {
  return lang != Lang::zh && lang != Lang::ja && lang != Lang::th;
}

}  // namespace mrag
