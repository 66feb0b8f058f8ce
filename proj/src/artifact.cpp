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

#include "mrag/artifact.hpp"

#include "mrag/error.hpp"
#include "mrag/io.hpp"

namespace mrag::artifact {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ModeInfo {
  RetrievalMode mode;
  std::string_view name;
  std::string_view display;
};

constexpr std::array<ModeInfo, 5> kModes = {{
    {RetrievalMode::none, "none", "No retrieval"},
    {RetrievalMode::english, "english", "English"},
    {RetrievalMode::user_lang, "user_lang", "User lang"},
    {RetrievalMode::english_user_lang, "english+user_lang", "English+UL"},
    {RetrievalMode::all_langs, "all_langs", "All langs"},
}};

json entries_to_json(const std::vector<ContextEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) {
    arr.push_back({{"passage_id", e.passage_id},
                   {"title", e.title},
                   {"text", e.text},
                   {"lang", to_string(e.lang)},
                   {"score", e.score}});
  }
  return arr;
}

std::vector<ContextEntry> entries_from_json(const json& arr) {
  std::vector<ContextEntry> out;
  for (const auto& e : arr) {
    out.push_back({e.at("passage_id"), e.at("title"), e.at("text"), parse_language(e.at("lang").get<std::string>()),
                   e.at("score").get<double>()});
  }
  return out;
}

}  // namespace

std::string_view to_string(RetrievalMode mode) { return kModes[static_cast<std::size_t>(mode)].name; }

std::string_view display_name(RetrievalMode mode) { return kModes[static_cast<std::size_t>(mode)].display; }

RetrievalMode parse_mode(std::string_view name) {
  for (const auto& m : kModes) {
    if (m.name == name) return m.mode;
  }
  throw ConfigError("unknown retrieval mode '" + std::string(name) +
                    "' (expected none, english, user_lang, english+user_lang, all_langs)");
}

json to_json(const GenerationRecord& r) {
  return json{{"query_id", r.query_id},
              {"dataset", r.dataset},
              {"lang", to_string(r.ul)},
              {"question", r.question},
              {"search_query", r.search_query},
              {"gold_answers", r.gold_answers},
              {"unanswerable", r.unanswerable},
              {"system_prompt", r.system_prompt},
              {"context", entries_to_json(r.context)},
              {"first_stage", entries_to_json(r.first_stage)},
              {"response", r.response},
              {"services", r.services}};
}

GenerationRecord record_from_json(const json& obj) {
  GenerationRecord r;
  r.query_id = obj.at("query_id");
  r.dataset = obj.value("dataset", "");
  r.ul = parse_language(obj.at("lang").get<std::string>());
  r.question = obj.at("question");
  r.search_query = obj.value("search_query", r.question);
  r.gold_answers = obj.at("gold_answers").get<std::vector<std::string>>();
  r.unanswerable = obj.value("unanswerable", false);
  r.system_prompt = obj.at("system_prompt");
  r.context = entries_from_json(obj.at("context"));
  r.first_stage = entries_from_json(obj.value("first_stage", json::array()));
  r.response = obj.at("response");
  r.services = obj.value("services", std::map<std::string, std::string>{});
  return r;
}

json to_json(const ErrorEntry& e) {
  return json{{"query_id", e.query_id},
              {"dataset", e.dataset},
              {"lang", to_string(e.lang)},
              {"stage", e.stage},
              {"message", e.message}};
}

ErrorEntry error_from_json(const json& obj) {
  return {obj.at("query_id"), obj.value("dataset", ""), parse_language(obj.at("lang").get<std::string>()),
          obj.at("stage"), obj.at("message")};
}

json to_json(const RunManifest& m) {
  return json{{"format_version", m.format_version},
              {"config_hash", m.config_hash},
              {"config", m.config},
              {"status", m.status},
              {"total_queries", m.total_queries},
              {"records", m.records},
              {"errors", m.errors}};
}

RunManifest manifest_from_json(const json& obj) {
  RunManifest m;
  m.format_version = obj.at("format_version");
  if (m.format_version != kFormatVersion) {
    throw VersionError("run artifact format " + std::to_string(m.format_version) + " is not supported");
  }
  m.config_hash = obj.at("config_hash");
  m.config = obj.at("config");
  m.status = obj.at("status");
  m.total_queries = obj.at("total_queries");
  m.records = obj.at("records");
  m.errors = obj.at("errors");
  return m;
}

RunManifest read_manifest(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  if (!fs::exists(path)) throw IoError("no run manifest at " + path.string());
  try {
    return manifest_from_json(json::parse(io::read_file(path)));
  } catch (const json::exception& e) {
    throw CorruptionError("run manifest unreadable: " + std::string(e.what()));
  }
}

void write_manifest(const fs::path& dir, const RunManifest& manifest) {
  io::write_file_atomic(dir / "manifest.json", to_json(manifest).dump(2) + "\n");
}

std::vector<GenerationRecord> read_journal(const fs::path& path) {
  std::vector<GenerationRecord> out;
  if (!fs::exists(path)) return out;
  auto lines = io::split_lines(io::read_file(path));
  for (std::size_t i = 0; i < lines.lines.size(); ++i) {
    const bool last = i + 1 == lines.lines.size();
    if (lines.lines[i].empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(lines.lines[i])));
    } catch (const json::exception&) {
      // Only an unterminated final line can be a torn write.
      if (last && !lines.complete_last_line) break;
      throw CorruptionError("journal line " + std::to_string(i + 1) + " is damaged in " + path.string());
    }
  }
  return out;
}

RunArtifact read_artifact(const fs::path& dir) {
  RunArtifact art;
  art.manifest = read_manifest(dir);
  const auto records_path = dir / "records.jsonl";
  try {
    if (fs::exists(records_path)) {
      for (const auto& line : io::split_lines(io::read_file(records_path)).lines) {
        if (!line.empty()) art.records.push_back(record_from_json(json::parse(line)));
      }
    } else {
      art.records = read_journal(dir / "journal.jsonl");
      art.from_journal = true;
    }
    if (fs::exists(dir / "errors.jsonl")) {
      for (const auto& line : io::split_lines(io::read_file(dir / "errors.jsonl")).lines) {
        if (!line.empty()) art.errors.push_back(error_from_json(json::parse(line)));
      }
    }
  } catch (const json::exception& e) {
    throw CorruptionError("run artifact unreadable in " + dir.string() + ": " + e.what());
  }
  if (!art.from_journal) {
    if (art.records.size() != art.manifest.records || art.errors.size() != art.manifest.errors) {
      throw CorruptionError("run artifact in " + dir.string() + " does not match its manifest counts");
    }
    if (art.records.size() + art.errors.size() != art.manifest.total_queries) {
      throw CorruptionError("run artifact in " + dir.string() + " does not account for every query");
    }
  }
  return art;
}

}  // namespace mrag::artifact
