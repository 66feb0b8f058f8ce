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

#include <gtest/gtest.h>

#include <fmt/format.h>

#include <json.hpp>

#include "generators.hpp"
#include "mrag/corpus.hpp"
#include "mrag/error.hpp"
#include "mrag/io.hpp"
#include "mrag/text.hpp"
#include "temp_dir.hpp"

namespace mrag::corpus {
namespace {

using testing::TempDir;

std::string words(std::size_t n, const std::string& prefix = "w") {
  std::string out;
  for (std::size_t i = 1; i <= n; ++i) out += (i > 1 ? " " : "") + prefix + std::to_string(i);
  return out;
}

// Reference splitter: cut the word list every 100 entries.
std::vector<std::string> reference_windows(const std::string& body) {
  std::vector<std::string> out;
  auto ws = text::split_whitespace(body);
  for (std::size_t i = 0; i < ws.size(); i += 100) {
    std::string chunk;
    for (std::size_t j = i; j < std::min(ws.size(), i + 100); ++j) chunk += (j > i ? " " : "") + ws[j];
    out.push_back(chunk);
  }
  return out;
}

TEST(ChunkTest, TwoHundredFiftyWordsGiveThreePassages) {
  auto ps = chunk_document({"d", "T", words(250), Lang::en});
  ASSERT_EQ(ps.size(), 3u);
  EXPECT_EQ(text::split_whitespace(ps[0].text).size(), 100u);
  EXPECT_EQ(text::split_whitespace(ps[1].text).size(), 100u);
  EXPECT_EQ(text::split_whitespace(ps[2].text).size(), 50u);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(ps[i].title, "T");
    EXPECT_EQ(ps[i].position, i);
    EXPECT_EQ(ps[i].passage_id, "d::" + std::to_string(i));
    EXPECT_EQ(ps[i].doc_id, "d");
  }
}

TEST(ChunkTest, HundredJapaneseCharactersIsOnePassage) {
  std::u32string body(100, U'語');
  auto ps = chunk_document({"j", "日本", text::to_utf8(body), Lang::ja});
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(text::code_point_count(ps[0].text), 100u);
}

TEST(ChunkTest, HundredAndOneWordsMatchReferenceSplitter) {
  auto body = words(101);
  auto ps = chunk_document({"d", "T", body, Lang::en});
  auto ref = reference_windows(body);
  ASSERT_EQ(ps.size(), ref.size());
  for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_EQ(ps[i].text, ref[i]);
  EXPECT_EQ(ps[1].text, "w101");
}

TEST(ChunkTest, EmptyBodyYieldsNothing) {
  EXPECT_TRUE(chunk_document({"d", "T", "", Lang::en}).empty());
  EXPECT_TRUE(chunk_document({"d", "T", " \n\t", Lang::fr}).empty());
  EXPECT_TRUE(chunk_document({"d", "T", "  ", Lang::zh}).empty());
}

TEST(ChunkTest, ShortDocumentIsKept) {
  auto ps = chunk_document({"d", "T", "one two", Lang::de});
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0].text, "one two");
}

TEST(ChunkTest, ThaiIsCutByCodePoints) {
  std::u32string body;
  for (int i = 0; i < 250; ++i) body += U"กข"[i % 2];
  auto ps = chunk_document({"t", "ไทย", text::to_utf8(body), Lang::th});
  ASSERT_EQ(ps.size(), 3u);
  EXPECT_EQ(text::code_point_count(ps[2].text), 50u);
}

TEST(ChunkTest, RandomDocumentsKeepInvariants) {
  testing::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Lang lang = kAllLanguages[testing::uniform(rng, 0, kAllLanguages.size() - 1)];
    Document doc{"d" + std::to_string(trial), "Title", "", lang};
    if (whitespace_separated(lang)) {
      doc.body = testing::random_spaced_body(rng, lang, testing::uniform(rng, 0, 350));
      auto ps = chunk_document(doc);
      auto all = text::split_whitespace(doc.body);
      std::size_t total = 0;
      std::vector<std::string> rebuilt;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        auto n = text::split_whitespace(ps[i].text).size();
        total += n;
        if (i + 1 < ps.size()) EXPECT_EQ(n, 100u);
        EXPECT_LE(n, 100u);
        rebuilt.push_back(ps[i].text);
      }
      EXPECT_EQ(total, all.size());
      EXPECT_EQ(text::join(rebuilt, " "), text::join(all, " "));
    } else {
      doc.body = testing::random_unsegmented_body(rng, lang, testing::uniform(rng, 0, 350));
      auto ps = chunk_document(doc);
      std::string rebuilt;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        auto n = text::code_point_count(ps[i].text);
        if (i + 1 < ps.size()) EXPECT_EQ(n, 100u);
        EXPECT_LE(n, 100u);
        rebuilt += ps[i].text;
      }
      EXPECT_EQ(rebuilt, text::collapse_whitespace(doc.body));
    }
    EXPECT_EQ(chunk_document(doc), chunk_document(doc));
  }
}

TEST(ChunkTest, JoinedTextPutsTitleOnItsOwnLine) {
  Passage p{"d::0", "d", "Paris", "Capital of France.", Lang::en, 0};
  EXPECT_EQ(joined_text(p), "Paris\nCapital of France.");
}

TEST(LoadTest, DocumentsInFileOrder) {
  TempDir dir;
  io::write_file_atomic(dir / "d.jsonl",
                        R"({"id":"a","title":"A","text":"x","lang":"en"})"
                        "\n\n"
                        R"({"id":"b","title":"B","text":"y","lang":"fr"})"
                        "\n"
                        R"({"id":"c","title":"C","text":"z","lang":"ja"})"
                        "\n");
  auto docs = load_documents(dir / "d.jsonl");
  ASSERT_EQ(docs.size(), 3u);
  EXPECT_EQ(docs[0].doc_id, "a");
  EXPECT_EQ(docs[1].lang, Lang::fr);
  EXPECT_EQ(docs[2].body, "z");
}

TEST(LoadTest, MissingTitleNamesLine) {
  TempDir dir;
  io::write_file_atomic(dir / "d.jsonl",
                        R"({"id":"a","title":"A","text":"x","lang":"en"})"
                        "\n"
                        R"({"id":"b","text":"y","lang":"en"})"
                        "\n");
  try {
    load_documents(dir / "d.jsonl");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("title"), std::string::npos);
  }
}

TEST(LoadTest, EmptyFileIsEmptyStream) {
  TempDir dir;
  io::write_file_atomic(dir / "d.jsonl", "");
  EXPECT_TRUE(load_documents(dir / "d.jsonl").empty());
  EXPECT_THROW(load_documents(dir / "missing.jsonl"), IoError);
}

TEST(LoadTest, QueryRecord) {
  TempDir dir;
  io::write_file_atomic(dir / "q.jsonl", R"({"query_id":"q1","text":"Qui ?","lang":"fr","gold_answers":["x"]})"
                                         "\n");
  auto qs = load_queries(dir / "q.jsonl", "mkqa");
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_EQ(qs[0].query_id, "q1");
  EXPECT_EQ(qs[0].lang, Lang::fr);
  EXPECT_EQ(qs[0].gold_answers, std::vector<std::string>{"x"});
  EXPECT_EQ(qs[0].dataset, "mkqa");
}

TEST(LoadTest, QueryErrors) {
  TempDir dir;
  io::write_file_atomic(dir / "bad_lang.jsonl", R"({"query_id":"q1","text":"t","lang":"xx","gold_answers":["x"]})"
                                                "\n");
  try {
    load_queries(dir / "bad_lang.jsonl");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("xx"), std::string::npos);
  }
  io::write_file_atomic(dir / "no_answers.jsonl", R"({"query_id":"q1","text":"t","lang":"en","gold_answers":[]})"
                                                  "\n");
  EXPECT_THROW(load_queries(dir / "no_answers.jsonl"), SchemaError);
  io::write_file_atomic(dir / "flagged.jsonl",
                        R"({"query_id":"q1","text":"t","lang":"en","gold_answers":[],"unanswerable":true})"
                        "\n");
  auto qs = load_queries(dir / "flagged.jsonl");
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_TRUE(qs[0].unanswerable);
  io::write_file_atomic(dir / "dup.jsonl", R"({"query_id":"q1","text":"t","lang":"en","gold_answers":["a"]})"
                                           "\n"
                                           R"({"query_id":"q1","text":"u","lang":"en","gold_answers":["b"]})"
                                           "\n");
  EXPECT_THROW(load_queries(dir / "dup.jsonl"), SchemaError);
}

TEST(LoadTest, MkqaSizedFile) {
  TempDir dir;
  std::string body;
  for (int i = 0; i < 2827; ++i) {
    nlohmann::json rec{{"query_id", fmt::format("mkqa-{}", i)},
                       {"text", fmt::format("question {}", i)},
                       {"lang", std::string(to_string(kAllLanguages[i % 13]))},
                       {"gold_answers", {fmt::format("answer {}", i)}}};
    body += rec.dump() + "\n";
  }
  io::write_file_atomic(dir / "mkqa.jsonl", body);
  EXPECT_EQ(load_queries(dir / "mkqa.jsonl", "mkqa").size(), 2827u);
}

Collection sample_collection() {
  return build_collection("c", {{"a", "A", "one two three", Lang::en},
                                {"b", "B", "quatre cinq", Lang::en},
                                {"c", "C", "six", Lang::en}});
}

TEST(StoreTest, RoundTrip) {
  TempDir dir;
  auto c = sample_collection();
  ASSERT_EQ(c.passages.size(), 3u);
  persist_store(c, dir / "s");
  EXPECT_EQ(open_store(dir / "s"), c);
}

TEST(StoreTest, TruncatedFileIsCorruption) {
  TempDir dir;
  persist_store(sample_collection(), dir / "s");
  auto records = io::read_file(dir / "s" / "passages.jsonl");
  io::write_file_atomic(dir / "s" / "passages.jsonl", records.substr(0, records.size() / 2));
  EXPECT_THROW(open_store(dir / "s"), CorruptionError);
}

TEST(StoreTest, VersionMismatch) {
  TempDir dir;
  persist_store(sample_collection(), dir / "s");
  auto m = nlohmann::json::parse(io::read_file(dir / "s" / "manifest.json"));
  m["format_version"] = 99;
  io::write_file_atomic(dir / "s" / "manifest.json", m.dump());
  EXPECT_THROW(open_store(dir / "s"), VersionError);
}

TEST(StoreTest, MergedLanguagesSurviveRoundTrip) {
  TempDir dir;
  auto en = build_collection("en", {{"en-1", "A", "alpha beta", Lang::en}});
  auto fr = build_collection("fr", {{"fr-1", "B", "gamma delta", Lang::fr}});
  auto merged = merge_collections("en+fr", {en, fr});
  persist_store(merged, dir / "m");
  auto back = open_store(dir / "m");
  EXPECT_EQ(back.langs, (std::set<Lang>{Lang::en, Lang::fr}));
  EXPECT_EQ(back, merged);
}

TEST(StoreTest, DuplicateIdsRejected) {
  EXPECT_THROW(build_collection("c", {{"a", "A", "x", Lang::en}, {"a", "B", "y", Lang::en}}), ConfigError);
  auto one = build_collection("x", {{"a", "A", "x", Lang::en}});
  EXPECT_THROW(merge_collections("xx", {one, one}), ConfigError);
}

TEST(StoreTest, RandomUnionsHaveUniqueIds) {
  testing::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Collection> parts;
    auto n = testing::uniform(rng, 1, 4);
    for (std::size_t p = 0; p < n; ++p) {
      std::vector<Document> docs;
      auto m = testing::uniform(rng, 0, 6);
      for (std::size_t d = 0; d < m; ++d) {
        docs.push_back({fmt::format("p{}-d{}", p, d), "T",
                        testing::random_spaced_body(rng, Lang::en, testing::uniform(rng, 1, 250)), Lang::en});
      }
      parts.push_back(build_collection("p" + std::to_string(p), docs));
    }
    auto merged = merge_collections("u", parts);
    std::set<std::string> ids;
    for (const auto& p : merged.passages) ids.insert(p.passage_id);
    EXPECT_EQ(ids.size(), merged.passages.size());
  }
}

}  // namespace
}  // namespace mrag::corpus
