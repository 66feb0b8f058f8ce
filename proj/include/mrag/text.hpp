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

#include <string>
#include <string_view>
#include <vector>

// Unicode helpers shared by chunking, scoring and the mock services. All
// strings are UTF-8; ill-formed sequences decode to U+FFFD.
namespace mrag::text {

std::u32string to_code_points(std::string_view utf8);
std::string to_utf8(std::u32string_view code_points);

std::size_t code_point_count(std::string_view utf8);

bool is_whitespace(char32_t c);
// General category P*.
bool is_punctuation(char32_t c);
bool is_letter(char32_t c);

// Full Unicode lowercase mapping (root locale).
std::string lowercase(std::string_view utf8);

// Splits on runs of Unicode whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view utf8);

// Collapses whitespace runs to one ASCII space and trims both ends.
std::string collapse_whitespace(std::string_view utf8);

// Lowercased tokens with punctuation treated as whitespace.
std::vector<std::string> lexical_tokens(std::string_view utf8);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace mrag::text
