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

#include "mrag/corpus.hpp"

#include <cstdio>
#include <json.hpp>
#include <unordered_set>

#include "mrag/error.hpp"
#include "mrag/io.hpp"
#include "mrag/text.hpp"

namespace mrag::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

std::string joined_text(const Passage& passage) { return passage.title + "\n" + passage.text; }

std::vector<Passage> chunk_document(const Document& doc, const ChunkPolicy& policy) {
  std::vector<std::string> chunks;
  if (whitespace_separated(doc.lang)) {
    auto words = text::split_whitespace(doc.body);
    for (std::size_t i = 0; i < words.size(); i += policy.word_limit) {
      auto end = std::min(words.size(), i + policy.word_limit);
      std::vector<std::string> window(words.begin() + static_cast<std::ptrdiff_t>(i),
                                      words.begin() + static_cast<std::ptrdiff_t>(end));
      chunks.push_back(text::join(window, " "));
    }
  } else {
    auto chars = text::to_code_points(text::collapse_whitespace(doc.body));
    for (std::size_t i = 0; i < chars.size(); i += policy.char_limit) {
      chunks.push_back(text::to_utf8(std::u32string_view(chars).substr(i, policy.char_limit)));
    }
  }

  std::vector<Passage> passages;
  passages.reserve(chunks.size());
  for (std::size_t pos = 0; pos < chunks.size(); ++pos) {
    passages.push_back(Passage{doc.doc_id + "::" + std::to_string(pos), doc.doc_id, doc.title,
                               std::move(chunks[pos]), doc.lang, pos});
  }
  return passages;
}

namespace {

const json& require(const json& obj, const char* field, const std::string& source,
                    std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) throw SchemaError(source, line, std::string("missing field '") + field + "'");
  return *it;
}

std::string require_string(const json& obj, const char* field, const std::string& source,
                           std::size_t line) {
  const auto& v = require(obj, field, source, line);
  if (!v.is_string()) throw SchemaError(source, line, std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

Lang require_lang(const json& obj, const std::string& source, std::size_t line) {
  auto code = require_string(obj, "lang", source, line);
  auto lang = try_parse_language(code);
  if (!lang) throw SchemaError(source, line, "unknown language code '" + code + "'");
  return *lang;
}

json parse_line(const std::string& line, const std::string& source, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError(source, line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw SchemaError(source, line_no, "expected a JSON object");
  return obj;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

DocumentReader::DocumentReader(const fs::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path.string());
}

std::optional<Document> DocumentReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (blank(line)) continue;
    const auto source = path_.string();
    auto obj = parse_line(line, source, line_no_);
    Document doc;
    doc.doc_id = require_string(obj, obj.contains("doc_id") ? "doc_id" : "id", source, line_no_);
    doc.title = require_string(obj, "title", source, line_no_);
    doc.body = require_string(obj, obj.contains("body") ? "body" : "text", source, line_no_);
    doc.lang = require_lang(obj, source, line_no_);
    if (doc.doc_id.empty()) throw SchemaError(source, line_no_, "empty document id");
    return doc;
  }
  if (in_.bad()) throw IoError("read failed: " + path_.string());
  return std::nullopt;
}

std::vector<Document> load_documents(const fs::path& path) {
  DocumentReader reader(path);
  std::vector<Document> docs;
  while (auto doc = reader.next()) docs.push_back(std::move(*doc));
  return docs;
}

std::vector<QueryRecord> load_queries(const fs::path& path, const std::string& default_dataset) {
  const auto source = path.string();
  auto lines = io::split_lines(io::read_file(path));
  std::vector<QueryRecord> records;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < lines.lines.size(); ++i) {
    const auto& line = lines.lines[i];
    const auto line_no = i + 1;
    if (blank(line)) continue;
    auto obj = parse_line(line, source, line_no);
    QueryRecord q;
    q.query_id = require_string(obj, "query_id", source, line_no);
    q.text = require_string(obj, "text", source, line_no);
    q.lang = require_lang(obj, source, line_no);
    const auto& answers = require(obj, "gold_answers", source, line_no);
    if (!answers.is_array()) throw SchemaError(source, line_no, "gold_answers must be a list");
    for (const auto& a : answers) {
      if (!a.is_string()) throw SchemaError(source, line_no, "gold answers must be strings");
      if (!a.get<std::string>().empty()) q.gold_answers.push_back(a.get<std::string>());
    }
    if (auto it = obj.find("unanswerable"); it != obj.end() && it->is_boolean()) {
      q.unanswerable = it->get<bool>();
    }
    if (q.gold_answers.empty() && !q.unanswerable) {
      throw SchemaError(source, line_no,
                        "query '" + q.query_id + "' has no gold answers and is not flagged unanswerable");
    }
    if (auto it = obj.find("dataset"); it != obj.end() && it->is_string()) {
      q.dataset = it->get<std::string>();
    } else {
      q.dataset = default_dataset;
    }
    if (q.text.empty()) throw SchemaError(source, line_no, "query '" + q.query_id + "' has empty text");
    if (!seen.insert(q.query_id).second) {
      throw SchemaError(source, line_no, "duplicate query_id '" + q.query_id + "'");
    }
    records.push_back(std::move(q));
  }
  return records;
}

Collection build_collection(const std::string& collection_id, const std::vector<Document>& docs,
                            const ChunkPolicy& policy) {
  Collection c;
  c.collection_id = collection_id;
  std::unordered_set<std::string> ids;
  for (const auto& doc : docs) {
    if (!ids.insert(doc.doc_id).second) throw ConfigError("duplicate doc_id '" + doc.doc_id + "'");
    c.langs.insert(doc.lang);
    for (auto& p : chunk_document(doc, policy)) c.passages.push_back(std::move(p));
  }
  return c;
}

Collection merge_collections(const std::string& collection_id, const std::vector<Collection>& parts) {
  Collection merged;
  merged.collection_id = collection_id;
  std::unordered_set<std::string> ids;
  for (const auto& part : parts) {
    merged.langs.insert(part.langs.begin(), part.langs.end());
    for (const auto& p : part.passages) {
      if (!ids.insert(p.passage_id).second) {
        throw ConfigError("passage id collision '" + p.passage_id + "' while merging " + part.collection_id);
      }
      merged.passages.push_back(p);
    }
  }
  return merged;
}

namespace {

json passage_to_json(const Passage& p) {
  return json{{"id", p.passage_id}, {"doc_id", p.doc_id}, {"title", p.title},
              {"text", p.text},     {"lang", to_string(p.lang)}, {"position", p.position}};
}

std::string format_checksum(uint32_t crc) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", crc);
  return buf;
}

}  // namespace

void persist_store(const Collection& collection, const fs::path& dir) {
  fs::create_directories(dir);
  std::string records;
  for (const auto& p : collection.passages) records += passage_to_json(p).dump() + "\n";

  json langs = json::array();
  for (auto l : collection.langs) langs.push_back(to_string(l));
  json manifest{{"format_version", kStoreFormatVersion},
                {"collection_id", collection.collection_id},
                {"langs", langs},
                {"passage_count", collection.passages.size()},
                {"checksum", format_checksum(io::crc32(records))}};
  io::write_file_atomic(dir / "passages.jsonl", records);
  io::write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

Collection open_store(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw IoError("no passage store at " + dir.string());
  json manifest;
  try {
    manifest = json::parse(io::read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw CorruptionError("store manifest unreadable: " + std::string(e.what()));
  }
  if (manifest.value("format_version", 0) != kStoreFormatVersion) {
    throw VersionError("store format version " + manifest.value("format_version", json(0)).dump() +
                       " is not supported (expected " + std::to_string(kStoreFormatVersion) + ")");
  }
  auto records = io::read_file(dir / "passages.jsonl");
  if (format_checksum(io::crc32(records)) != manifest.value("checksum", "")) {
    throw CorruptionError("passage store checksum mismatch in " + dir.string());
  }

  Collection c;
  c.collection_id = manifest.at("collection_id").get<std::string>();
  for (const auto& l : manifest.at("langs")) c.langs.insert(parse_language(l.get<std::string>()));
  auto lines = io::split_lines(records);
  for (const auto& line : lines.lines) {
    auto obj = json::parse(line);
    c.passages.push_back(Passage{obj.at("id"), obj.at("doc_id"), obj.at("title"), obj.at("text"),
                                 parse_language(obj.at("lang").get<std::string>()),
                                 obj.at("position").get<std::size_t>()});
  }
  if (c.passages.size() != manifest.at("passage_count").get<std::size_t>()) {
    throw CorruptionError("passage count does not match manifest in " + dir.string());
  }
  return c;
}

}  // namespace mrag::corpus
