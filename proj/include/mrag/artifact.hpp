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

// On-disk run artifact shared by the pipeline (writer) and evaluation (reader):
//   manifest.json   resolved config, config hash, status, counts
//   records.jsonl   one GenerationRecord per line, sorted by query_id
//   errors.jsonl    quarantined queries, sorted by query_id
//   journal.jsonl   append-only records of an unfinished run
//   timings.jsonl   wall-clock timings; not part of the canonical artifact

#include <array>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrag/language.hpp"

namespace mrag::artifact {

enum class RetrievalMode { none, english, user_lang, english_user_lang, all_langs };

inline constexpr std::array<RetrievalMode, 5> kAllModes = {
    RetrievalMode::none, RetrievalMode::english, RetrievalMode::user_lang, RetrievalMode::english_user_lang,
    RetrievalMode::all_langs};

// Config spelling: none, english, user_lang, english+user_lang, all_langs.
std::string_view to_string(RetrievalMode mode);
RetrievalMode parse_mode(std::string_view name);
// Column heading used in report tables.
std::string_view display_name(RetrievalMode mode);

struct ContextEntry {
  std::string passage_id;
  std::string title;
  std::string text;
  Lang lang = Lang::en;
  double score = 0.0;

  bool operator==(const ContextEntry&) const = default;
};

struct GenerationRecord {
  std::string query_id;
  std::string dataset;
  Lang ul = Lang::en;
  std::string question;
  std::string search_query;
  std::vector<std::string> gold_answers;
  bool unanswerable = false;
  std::string system_prompt;
  // Reranked context handed to the generator, best first.
  std::vector<ContextEntry> context;
  // First-stage top-k before reranking.
  std::vector<ContextEntry> first_stage;
  // Verbatim, untrimmed.
  std::string response;
  std::map<std::string, std::string> services;

  bool operator==(const GenerationRecord&) const = default;
};

struct ErrorEntry {
  std::string query_id;
  std::string dataset;
  Lang lang = Lang::en;
  std::string stage;
  std::string message;

  bool operator==(const ErrorEntry&) const = default;
};

inline constexpr int kFormatVersion = 1;

struct RunManifest {
  int format_version = kFormatVersion;
  std::string config_hash;
  nlohmann::json config;
  std::string status;  // running | complete | partial
  std::size_t total_queries = 0;
  std::size_t records = 0;
  std::size_t errors = 0;
};

struct RunArtifact {
  RunManifest manifest;
  std::vector<GenerationRecord> records;
  std::vector<ErrorEntry> errors;
  // True when records came from the journal of an unfinished run.
  bool from_journal = false;
};

nlohmann::json to_json(const GenerationRecord& record);
GenerationRecord record_from_json(const nlohmann::json& obj);
nlohmann::json to_json(const ErrorEntry& entry);
ErrorEntry error_from_json(const nlohmann::json& obj);
nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& obj);

RunManifest read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

// Reads journal lines, dropping a crash-truncated final line.
std::vector<GenerationRecord> read_journal(const std::filesystem::path& path);

// Loads a finished or interrupted run. Throws CorruptionError when the
// records disagree with the manifest counts.
RunArtifact read_artifact(const std::filesystem::path& dir);

}  // namespace mrag::artifact
