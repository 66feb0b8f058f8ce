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

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mrag/language.hpp"

namespace mrag::corpus {

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
  Lang lang = Lang::en;
};

// A titled chunk of one document; the unit of retrieval.
struct Passage {
  std::string passage_id;
  std::string doc_id;
  std::string title;
  std::string text;
  Lang lang = Lang::en;
  std::size_t position = 0;

  bool operator==(const Passage&) const = default;
};

// The text a retriever or reader sees for a passage: title, newline, text.
std::string joined_text(const Passage& passage);

struct Collection {
  std::string collection_id;
  std::set<Lang> langs;
  std::vector<Passage> passages;

  bool operator==(const Collection&) const = default;
};

struct QueryRecord {
  std::string query_id;
  std::string text;
  Lang lang = Lang::en;
  std::vector<std::string> gold_answers;
  bool unanswerable = false;
  std::string dataset;
};

struct ChunkPolicy {
  std::size_t word_limit = 100;
  std::size_t char_limit = 100;
};

// Whitespace-separated languages are cut every `word_limit` words and the
// words rejoined with single spaces. zh/ja/th bodies are whitespace-collapsed
// and cut every `char_limit` code points. Passage ids are "{doc_id}::{position}".
std::vector<Passage> chunk_document(const Document& doc, const ChunkPolicy& policy = {});

// Streams documents from a JSON-lines file ({id, title, text, lang} per line;
// doc_id and body are accepted as aliases).
// Blank lines are skipped; malformed lines raise SchemaError with the line number.
class DocumentReader {
 public:
  explicit DocumentReader(const std::filesystem::path& path);

  std::optional<Document> next();

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

std::vector<Document> load_documents(const std::filesystem::path& path);

// JSON-lines {query_id, text, lang, gold_answers[, unanswerable][, dataset]}.
// `default_dataset` tags records that carry no dataset field.
std::vector<QueryRecord> load_queries(const std::filesystem::path& path,
                                      const std::string& default_dataset = "");

// Chunks every document; rejects duplicate doc_ids.
Collection build_collection(const std::string& collection_id, const std::vector<Document>& docs,
                            const ChunkPolicy& policy = {});

// Union of collections; passage ids must stay globally unique.
Collection merge_collections(const std::string& collection_id,
                             const std::vector<Collection>& parts);

inline constexpr int kStoreFormatVersion = 1;

// Writes manifest.json + passages.jsonl into `dir` (created if missing).
void persist_store(const Collection& collection, const std::filesystem::path& dir);
Collection open_store(const std::filesystem::path& dir);

}  // namespace mrag::corpus
