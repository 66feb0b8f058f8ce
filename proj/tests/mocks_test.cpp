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

#include <cctype>
#include <cstring>
#include <set>
#include <sstream>

#include "mrag/clients.hpp"
#include "mrag/io.hpp"
#include "mrag/mocks.hpp"
#include "mrag/prompting.hpp"
#include "mrag/text.hpp"

namespace mrag::mocks {
namespace {

using clients::ChatMessage;
using clients::ChatRequest;
using clients::Role;
using corpus::Passage;

std::string hex_of(const std::vector<float>& values) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (float f : values) {
    unsigned char bytes[4];
    std::memcpy(bytes, &f, 4);
    for (unsigned char b : bytes) {
      out += digits[b >> 4];
      out += digits[b & 15];
    }
  }
  return out;
}

TEST(MockEmbedderTest, ShapeContract) {
  MockEmbedder e;
  std::vector<std::string> texts{"a", "b"};
  auto vs = e.embed(texts);
  ASSERT_EQ(vs.size(), 2u);
  EXPECT_EQ(vs[0].dims(), vs[1].dims());
  EXPECT_EQ(vs[0].dims(), 64u);
}

TEST(MockEmbedderTest, Deterministic) {
  MockEmbedder a, b;
  EXPECT_EQ(a.embed_one("Paris is in France"), b.embed_one("Paris is in France"));
  EXPECT_NE(MockEmbedder(1).embed_one("Paris"), MockEmbedder(2).embed_one("Paris"));
}

TEST(MockEmbedderTest, HelloMatchesGoldenBytes) {
  // Golden produced by tests/golden/make_mock_embed_golden.py, an
  // independent implementation of the hashing scheme.
  auto golden = io::read_file(std::string(MRAG_TEST_DIR) + "/golden/mock_embed_hello.hex");
  while (!golden.empty() && std::isspace(static_cast<unsigned char>(golden.back()))) golden.pop_back();
  EXPECT_EQ(hex_of(MockEmbedder().embed_one("hello").values), golden);
}

TEST(MockEmbedderTest, UnitNorm) {
  MockEmbedder e;
  for (const char* t : {"x", "Der Gründer von Berlin", "東京大学"}) {
    double n = 0;
    for (float v : e.embed_one(t).values) n += double(v) * v;
    EXPECT_NEAR(n, 1.0, 1e-6);
  }
}

TEST(MockEmbedderTest, RejectsEmptyInput) {
  MockEmbedder e;
  std::vector<std::string> none;
  EXPECT_THROW(e.embed(none), PreconditionError);
  std::vector<std::string> blank{""};
  EXPECT_THROW(e.embed(blank), PreconditionError);
}

TEST(MockRerankerTest, RedFoxFixture) {
  // Distinct query tokens {red, fox}. Hand counts:
  //   p1 "A red fox ran."        -> 2/2
  //   p2 "The red barn."         -> 1/2
  //   p3 "Blue whales sing."     -> 0/2
  std::vector<Passage> ps{{"p3", "p3", "Ocean", "Blue whales sing.", Lang::en, 0},
                          {"p1", "p1", "Woods", "A red fox ran.", Lang::en, 0},
                          {"p2", "p2", "Farm", "The red barn.", Lang::en, 0}};
  MockReranker r;
  auto scores = r.rerank("red fox", ps);
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_EQ(scores[0].passage_id, "p3");
  EXPECT_DOUBLE_EQ(scores[0].score, 0.0);
  EXPECT_DOUBLE_EQ(scores[1].score, 1.0);
  EXPECT_DOUBLE_EQ(scores[2].score, 0.5);
  clients::sort_by_relevance(scores);
  EXPECT_EQ(scores[0].passage_id, "p1");
  EXPECT_EQ(scores[2].passage_id, "p3");
}

TEST(MockRerankerTest, FiftyInFiftyOut) {
  std::vector<Passage> ps;
  for (int i = 0; i < 50; ++i) ps.push_back({"p" + std::to_string(i), "d", "t", "text " + std::to_string(i), Lang::en, 0});
  MockReranker r;
  auto scores = r.rerank("text 7", ps);
  ASSERT_EQ(scores.size(), 50u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(scores[i].passage_id, ps[i].passage_id);
}

TEST(MockRerankerTest, SingleCandidate) {
  std::vector<Passage> ps{{"only", "d", "t", "x", Lang::en, 0}};
  MockReranker r;
  auto scores = r.rerank("anything", ps);
  ASSERT_EQ(scores.size(), 1u);
  clients::sort_by_relevance(scores);
  EXPECT_EQ(scores[0].passage_id, "only");
  std::vector<Passage> none;
  EXPECT_THROW(r.rerank("q", none), PreconditionError);
}

TEST(SortTest, TiesBreakById) {
  std::vector<clients::RerankScore> s{{"b", 1.0}, {"a", 1.0}, {"c", 2.0}};
  clients::sort_by_relevance(s);
  EXPECT_EQ(s[0].passage_id, "c");
  EXPECT_EQ(s[1].passage_id, "a");
  EXPECT_EQ(s[2].passage_id, "b");
}

// Oracle for the extractive reader on ASCII text.
std::set<std::string> ascii_tokens(const std::string& s) {
  std::set<std::string> out;
  std::string cur;
  for (char c : s + " ") {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  return out;
}

TEST(MockGeneratorTest, PicksMaxOverlapSentence) {
  std::vector<std::pair<std::string, std::string>> docs{
      {"Rivers", "The Danube flows east. It passes through Vienna and Budapest."},
      {"Mountains", "Mont Blanc is the highest peak in the Alps. Climbers start in Chamonix."},
      {"Capitals", "Vienna is the capital of Austria. Budapest is the capital of Hungary."},
      {"Food", "Goulash is a stew. It is popular in Hungary."},
      {"Music", "Mozart was born in Salzburg. He later lived in Vienna."}};
  const std::string question = "What is the capital of Hungary?";

  std::vector<std::string> sentences;
  for (const auto& [title, body] : docs) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '.') {
        auto s = body.substr(start, i + 1 - start);
        if (s[0] == ' ') s.erase(0, 1);
        sentences.push_back(s);
        start = i + 1;
      }
    }
  }
  auto q = ascii_tokens(question);
  std::size_t best = 0, best_overlap = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::size_t o = 0;
    for (const auto& t : ascii_tokens(sentences[i])) o += q.count(t);
    if (o > best_overlap) best_overlap = o, best = i;
  }
  ASSERT_EQ(sentences[best], "Budapest is the capital of Hungary.");

  prompting::ContextSet ctx{"q", {}};
  for (std::size_t i = 0; i < docs.size(); ++i) {
    ctx.passages.push_back({"p" + std::to_string(i), "d", docs[i].first, docs[i].second, Lang::en, 0});
  }
  auto req = prompting::build_chat("Reply short.", prompting::format_context(ctx), question, 128);
  MockGenerator g;
  EXPECT_EQ(g.generate(req), sentences[best]);
}

TEST(MockGeneratorTest, NoContextGivesNoAnswer) {
  MockGenerator g;
  ChatRequest req{{{Role::system, "Reply short."}, {Role::user, "Who wrote Hamlet?"}}};
  EXPECT_EQ(g.generate(req), "no answer");
}

TEST(MockGeneratorTest, TruncatesToTokenBudget) {
  std::string long_sentence;
  for (int i = 0; i < 300; ++i) long_sentence += "word" + std::to_string(i) + " ";
  long_sentence += "question.";
  ChatRequest req{{{Role::user, "Document 1: T\n" + long_sentence + "\n\nword1 question?"}}, 128};
  MockGenerator g;
  auto out = g.generate(req);
  EXPECT_EQ(text::split_whitespace(out).size(), 128u);
  req.max_new_tokens = 5;
  EXPECT_EQ(g.generate(req), "word0 word1 word2 word3 word4");
}

TEST(MockGeneratorTest, FailureTrigger) {
  MockGenerator g("BOOM");
  ChatRequest req{{{Role::user, "please BOOM now"}}};
  try {
    g.generate(req);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_FALSE(e.retryable());
  }
}

TEST(ChatRequestTest, Validation) {
  EXPECT_THROW(clients::validate(ChatRequest{}), PreconditionError);
  EXPECT_THROW(clients::validate(ChatRequest{{{Role::user, ""}}}), PreconditionError);
  EXPECT_THROW(clients::validate(ChatRequest{{{Role::user, "a"}, {Role::system, "b"}}}), PreconditionError);
  EXPECT_THROW(clients::validate(ChatRequest{{{Role::user, "a"}}, 0}), PreconditionError);
  EXPECT_NO_THROW(clients::validate(ChatRequest{{{Role::system, "s"}, {Role::user, "u"}}}));
}

TEST(MockTranslatorTest, LexiconSubstitution) {
  Lexicon lex;
  lex[{Lang::fr, Lang::en}]["chat"] = "cat";
  MockTranslator t(lex);
  EXPECT_EQ(t.translate("chat", Lang::fr, Lang::en), "cat");
  EXPECT_EQ(t.translate("Le chat, noir!", Lang::fr, Lang::en), "Le cat, noir!");
  EXPECT_EQ(t.translate("Chat", Lang::fr, Lang::en), "cat");
}

TEST(MockTranslatorTest, UnknownTokensPassThrough) {
  Lexicon lex;
  lex[{Lang::fr, Lang::en}]["chat"] = "cat";
  MockTranslator t(lex);
  EXPECT_EQ(t.translate("bonjour le monde", Lang::fr, Lang::en), "bonjour le monde");
}

TEST(MockTranslatorTest, Errors) {
  MockTranslator t({});
  EXPECT_THROW(t.translate("x", Lang::fr, Lang::fr), PreconditionError);
  EXPECT_THROW(t.translate("x", Lang::fr, Lang::en), ServiceError);
}

TEST(RetryTest, RetriesOnlyRetryableErrors) {
  clients::ServicePolicy p;
  p.initial_backoff = std::chrono::milliseconds(1);
  int calls = 0;
  auto r = clients::with_retries(p, [&] {
    if (++calls < 3) throw ServiceError("flaky", true);
    return 42;
  });
  EXPECT_EQ(r, 42);
  EXPECT_EQ(calls, 3);

  calls = 0;
  EXPECT_THROW(clients::with_retries(p, [&]() -> int {
                 ++calls;
                 throw ServiceError("down", true);
               }),
               ServiceError);
  EXPECT_EQ(calls, 3);

  calls = 0;
  EXPECT_THROW(clients::with_retries(p, [&]() -> int {
                 ++calls;
                 throw ServiceError("bad request", false);
               }),
               ServiceError);
  EXPECT_EQ(calls, 1);
}

TEST(LimiterTest, BoundsConcurrency) {
  clients::InFlightLimiter limiter(2);
  std::atomic<int> active{0}, peak{0};
  std::vector<std::thread> ts;
  for (int i = 0; i < 8; ++i) {
    ts.emplace_back([&] {
      auto slot = limiter.acquire();
      int now = ++active;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --active;
    });
  }
  for (auto& t : ts) t.join();
  EXPECT_LE(peak.load(), 2);
}

}  // namespace
}  // namespace mrag::mocks
