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

#include "mrag/error.hpp"
#include "mrag/evaluation.hpp"
#include "mrag/io.hpp"
#include "mrag/mocks.hpp"
#include "mrag/pipeline.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"
#include "toy_world.hpp"

namespace mrag::pipeline {
namespace {

namespace fs = std::filesystem;
using artifact::RetrievalMode;
using testing::TempDir;

std::string artifact_bytes(const fs::path& dir) {
  return io::read_file(dir / "manifest.json") + "\n--\n" + io::read_file(dir / "records.jsonl") + "\n--\n" +
         io::read_file(dir / "errors.jsonl");
}

class ToyRunTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new TempDir();
    world_ = new testing::ToyWorld(testing::build_toy_world(root_->path() / "world"));
  }
  static void TearDownTestSuite() {
    delete world_;
    delete root_;
  }

  RunConfig config(RetrievalMode mode, const fs::path& out) const { return testing::toy_run_config(*world_, mode, out); }

  static std::vector<corpus::Passage> pool(RetrievalMode mode, Lang ul) {
    std::set<Lang> langs;
    if (mode == RetrievalMode::english || mode == RetrievalMode::english_user_lang) langs.insert(Lang::en);
    if (mode == RetrievalMode::user_lang || mode == RetrievalMode::english_user_lang) langs.insert(ul);
    if (mode == RetrievalMode::all_langs) langs = {Lang::en, Lang::fr, Lang::de};
    std::vector<corpus::Passage> out;
    for (Lang l : langs) {
      auto c = corpus::open_store(world_->stores.at(l));
      out.insert(out.end(), c.passages.begin(), c.passages.end());
    }
    return out;
  }

  TempDir dir_;
  static TempDir* root_;
  static testing::ToyWorld* world_;
};
TempDir* ToyRunTest::root_ = nullptr;
testing::ToyWorld* ToyRunTest::world_ = nullptr;

TEST_F(ToyRunTest, WorldShape) {
  EXPECT_EQ(world_->documents.size(), 100u);
  EXPECT_EQ(world_->query_records.size(), 25u);
}

TEST_F(ToyRunTest, EveryModeCompletesAndMatchesOracle) {
  for (auto mode : artifact::kAllModes) {
    auto cfg = config(mode, dir_ / std::string(artifact::to_string(mode)));
    auto services = make_services(cfg.services);
    auto outcome = run(cfg, services);
    EXPECT_EQ(outcome.total, 25u);
    EXPECT_EQ(outcome.completed, 25u);
    EXPECT_EQ(outcome.errors, 0u);
    EXPECT_TRUE(outcome.replay_mismatches.empty());
    EXPECT_EQ(outcome.replay_checked, 10u);

    auto art = artifact::read_artifact(cfg.output);
    EXPECT_EQ(art.manifest.status, "complete");
    ASSERT_EQ(art.records.size(), 25u);
    for (const auto& rec : art.records) {
      if (mode == RetrievalMode::none) {
        EXPECT_TRUE(rec.context.empty());
        continue;
      }
      auto want = testing::oracle_context(rec.search_query, pool(mode, rec.ul), 20, 5);
      std::vector<std::string> got;
      std::vector<corpus::Passage> ctx;
      for (const auto& c : rec.context) {
        got.push_back(c.passage_id);
        ctx.push_back({c.passage_id, "", c.title, c.text, c.lang, 0});
      }
      EXPECT_EQ(got, want) << rec.query_id << " " << artifact::to_string(mode);

      // recall@5 recomputed from the oracle's passages.
      std::vector<corpus::Passage> oracle_passages;
      auto p = pool(mode, rec.ul);
      for (const auto& id : want) {
        for (const auto& x : p) {
          if (x.passage_id == id) oracle_passages.push_back(x);
        }
      }
      EXPECT_EQ(evaluation::recall_at_k(rec.gold_answers, ctx, rec.ul),
                evaluation::recall_at_k(rec.gold_answers, oracle_passages, rec.ul));
    }
  }
}

TEST_F(ToyRunTest, TwoRunsAreByteIdentical) {
  for (auto mode : {RetrievalMode::none, RetrievalMode::all_langs}) {
    auto a = config(mode, dir_ / "a");
    auto b = config(mode, dir_ / "b");
    b.parallelism = 1;
    auto sa = make_services(a.services);
    auto sb = make_services(b.services);
    run(a, sa, {.force = true});
    run(b, sb, {.force = true});
    // Parallelism is excluded from the manifest config, so the bytes match.
    EXPECT_EQ(artifact_bytes(a.output), artifact_bytes(b.output));
    fs::remove_all(a.output);
    fs::remove_all(b.output);
  }
}

TEST_F(ToyRunTest, KillAndResumeEqualsUninterrupted) {
  auto full = config(RetrievalMode::english_user_lang, dir_ / "full");
  auto s1 = make_services(full.services);
  run(full, s1);

  auto cut = config(RetrievalMode::english_user_lang, dir_ / "cut");
  cut.parallelism = 1;
  auto s2 = make_services(cut.services);
  auto first = run(cut, s2, {.stop_after = 5});
  EXPECT_TRUE(first.interrupted);
  EXPECT_EQ(artifact::read_manifest(cut.output).status, "running");
  EXPECT_FALSE(fs::exists(cut.output / "records.jsonl"));
  // Simulate a crash mid-write: a torn final journal line.
  io::append_file(cut.output / "journal.jsonl", R"({"query_id":"q-zz","resp)");

  auto partial = artifact::read_artifact(cut.output);
  EXPECT_TRUE(partial.from_journal);
  EXPECT_EQ(partial.records.size(), 5u);

  auto second = run(cut, s2);
  EXPECT_EQ(second.resumed, 5u);
  EXPECT_EQ(second.completed, 25u);
  EXPECT_EQ(artifact_bytes(full.output), artifact_bytes(cut.output));
  EXPECT_FALSE(fs::exists(cut.output / "journal.jsonl"));
}

TEST_F(ToyRunTest, FaultIsolation) {
  auto cfg = config(RetrievalMode::english, dir_ / "faulty");
  cfg.user_languages = {Lang::en};
  cfg.services.chat.failure_trigger = world_->query_records[3].text;
  auto services = make_services(cfg.services);
  auto outcome = run(cfg, services);
  EXPECT_EQ(outcome.total, 10u);
  EXPECT_EQ(outcome.completed, 9u);
  EXPECT_EQ(outcome.errors, 1u);
  auto art = artifact::read_artifact(cfg.output);
  EXPECT_EQ(art.manifest.status, "partial");
  ASSERT_EQ(art.errors.size(), 1u);
  EXPECT_EQ(art.errors[0].query_id, world_->query_records[3].query_id);
  EXPECT_EQ(art.errors[0].stage, "generate");
}

TEST_F(ToyRunTest, NoRetrievalMakesNoRetrievalCalls) {
  auto cfg = config(RetrievalMode::none, dir_ / "none");
  auto embedder = std::make_shared<mocks::MockEmbedder>();
  auto reranker = std::make_shared<mocks::MockReranker>();
  auto generator = std::make_shared<mocks::MockGenerator>();
  ServiceSet services{embedder, reranker, generator, nullptr};
  run(cfg, services, {.replay_samples = 0});
  EXPECT_EQ(embedder->calls(), 0u);
  EXPECT_EQ(reranker->calls(), 0u);
  EXPECT_EQ(generator->calls(), 25u);
  auto art = artifact::read_artifact(cfg.output);
  for (const auto& rec : art.records) EXPECT_EQ(rec.response, "no answer");
}

TEST_F(ToyRunTest, StoredSystemPromptMatchesRenderer) {
  auto cfg = config(RetrievalMode::user_lang, dir_ / "prompts");
  auto services = make_services(cfg.services);
  run(cfg, services);
  auto catalog = prompting::PromptCatalog::from_directory(cfg.prompt_catalog);
  auto names = prompting::LanguageNameCatalog::from_file(cfg.language_names);
  for (const auto& rec : artifact::read_artifact(cfg.output).records) {
    EXPECT_EQ(rec.system_prompt, prompting::render_system_prompt(catalog.spec(cfg.prompt_label), rec.ul, names));
    EXPECT_LE(rec.context.size(), 5u);
  }
}

TEST_F(ToyRunTest, ConfigChangeNeedsForce) {
  auto cfg = config(RetrievalMode::english, dir_ / "r");
  auto services = make_services(cfg.services);
  run(cfg, services);
  auto changed = cfg;
  changed.top_k_context = 3;
  EXPECT_THROW(run(changed, services), ConfigError);
  auto outcome = run(changed, services, {.force = true});
  EXPECT_EQ(outcome.resumed, 0u);
  EXPECT_EQ(artifact::read_artifact(cfg.output).records[0].context.size(), 3u);
}

TEST_F(ToyRunTest, RerunOfCompleteRunIsNoOp) {
  auto cfg = config(RetrievalMode::english, dir_ / "r");
  auto services = make_services(cfg.services);
  run(cfg, services);
  auto before = artifact_bytes(cfg.output);
  auto outcome = run(cfg, services);
  EXPECT_EQ(outcome.resumed, 25u);
  EXPECT_EQ(artifact_bytes(cfg.output), before);
}

TEST_F(ToyRunTest, PreflightFailuresLeaveNoArtifacts) {
  auto missing_index = config(RetrievalMode::english_user_lang, dir_ / "x1");
  missing_index.indexes.erase("en+de");
  auto s = make_services(missing_index.services);
  EXPECT_THROW(run(missing_index, s), ConfigError);
  EXPECT_FALSE(fs::exists(missing_index.output));

  auto wrong_embedder = config(RetrievalMode::english, dir_ / "x2");
  wrong_embedder.services.embed.seed = 7;
  auto s2 = make_services(wrong_embedder.services);
  EXPECT_THROW(run(wrong_embedder, s2), ConfigError);
  EXPECT_FALSE(fs::exists(wrong_embedder.output));

  auto wrong_dims = config(RetrievalMode::english, dir_ / "x3");
  ServiceSet s3 = make_services(wrong_dims.services);
  s3.embedder = std::make_shared<mocks::MockEmbedder>(0, 32);
  EXPECT_THROW(run(wrong_dims, s3), Error);
  EXPECT_FALSE(fs::exists(wrong_dims.output));

  auto unreachable = config(RetrievalMode::none, dir_ / "x4");
  unreachable.services.chat.endpoint = "http://127.0.0.1:1";
  auto s4 = make_services(unreachable.services);
  EXPECT_THROW(run(unreachable, s4), ConfigError);
  EXPECT_FALSE(fs::exists(unreachable.output));
}

TEST_F(ToyRunTest, ConfigValidation) {
  auto doc = testing::toy_config_json(*world_, RetrievalMode::none, dir_ / "v");
  auto bad = doc;
  bad["run"]["top_k_context"] = 5;
  EXPECT_THROW(parse_run_config(bad["run"], bad["services"], {}), ConfigError);
  bad = doc;
  bad["run"]["retrieval_mode"] = "hybrid";
  EXPECT_THROW(parse_run_config(bad["run"], bad["services"], {}), ConfigError);
  bad = doc;
  bad["run"]["surprise"] = 1;
  EXPECT_THROW(parse_run_config(bad["run"], bad["services"], {}), ConfigError);
  bad = doc;
  bad["run"]["user_languages"] = {"xx"};
  EXPECT_THROW(parse_run_config(bad["run"], bad["services"], {}), ConfigError);
  auto ok = parse_run_config(doc["run"], doc["services"], {});
  EXPECT_EQ(ok.retrieve_k(), 50u);
  EXPECT_EQ(ok.context_k(), 5u);
  EXPECT_EQ(config_hash(ok), config_hash(parse_run_config(doc["run"], doc["services"], {})));
}

TEST_F(ToyRunTest, QueryTranslation) {
  auto cfg = config(RetrievalMode::english, dir_ / "qt");
  cfg.user_languages = {Lang::fr, Lang::de};
  cfg.query_translation.enabled = true;
  auto services = make_services(cfg.services);
  auto outcome = run(cfg, services);
  EXPECT_EQ(outcome.errors, 0u);
  for (const auto& rec : artifact::read_artifact(cfg.output).records) {
    EXPECT_NE(rec.search_query, rec.question);
    EXPECT_NE(rec.search_query.find("founder"), std::string::npos) << rec.search_query;
  }

  // English queries cannot be translated into English.
  auto same = config(RetrievalMode::english, dir_ / "qt-en");
  same.user_languages = {Lang::en};
  same.query_translation.enabled = true;
  auto s2 = make_services(same.services);
  auto o2 = run(same, s2);
  EXPECT_EQ(o2.errors, 10u);
  EXPECT_EQ(artifact::read_artifact(same.output).errors[0].stage, "translate");
}

TEST(SearchQueryTest, IdentityWhenOff) {
  corpus::QueryRecord q{"q", "Qui ?", Lang::fr, {"x"}, false, ""};
  EXPECT_EQ(make_search_query(q, {}, nullptr).text, "Qui ?");
  mocks::Lexicon lex;
  lex[{Lang::fr, Lang::en}]["qui"] = "who";
  mocks::MockTranslator t(lex);
  EXPECT_EQ(make_search_query(q, {true, Lang::en}, &t).text, "who ?");
  corpus::QueryRecord en{"q", "Who?", Lang::en, {"x"}, false, ""};
  EXPECT_THROW(make_search_query(en, {true, Lang::en}, &t), PreconditionError);
}

TEST(RetrieveTest, SmallCollectionFeedsAllCandidates) {
  TempDir dir;
  std::vector<corpus::Document> docs;
  for (int i = 0; i < 10; ++i) docs.push_back({"d" + std::to_string(i), "T", "text " + std::to_string(i), Lang::en});
  auto c = corpus::build_collection("c", docs);
  mocks::MockEmbedder e;
  auto idx = index::build_index(c, e, dir / "i");
  PassageLookup lookup;
  for (const auto& p : c.passages) lookup.emplace(p.passage_id, p);
  mocks::MockReranker r;
  auto got = retrieve_and_rerank({"q", "text 3"}, idx, lookup, e, r, {50, 5});
  EXPECT_EQ(got.candidates.size(), 10u);
  EXPECT_EQ(got.reranked.size(), 10u);
  EXPECT_EQ(got.context.passages.size(), 5u);
}

TEST(IndexKeyTest, Modes) {
  EXPECT_EQ(index_key(RetrievalMode::english, Lang::fr), "en");
  EXPECT_EQ(index_key(RetrievalMode::user_lang, Lang::fr), "fr");
  EXPECT_EQ(index_key(RetrievalMode::english_user_lang, Lang::fr), "en+fr");
  EXPECT_EQ(index_key(RetrievalMode::english_user_lang, Lang::en), "en");
  EXPECT_EQ(index_key(RetrievalMode::all_langs, Lang::ko), "all");
}

}  // namespace
}  // namespace mrag::pipeline
