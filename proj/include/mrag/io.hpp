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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mrag::io {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file then renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

void append_file(const std::filesystem::path& path, std::string_view contents);

// Splits on '\n'. A final line without a terminating newline is returned with
// `complete_last_line` false so crash-truncated journals can be detected.
struct Lines {
  std::vector<std::string> lines;
  bool complete_last_line = true;
};
Lines split_lines(std::string_view contents);

uint32_t crc32(std::string_view bytes, uint32_t seed = 0);

}  // namespace mrag::io
