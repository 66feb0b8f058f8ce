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

#include "mrag/http_clients.hpp"
#include "mrag/langid.hpp"
#include "mrag/mock_server.hpp"
#include "mrag/mocks.hpp"
#include "mrag/prompting.hpp"
#include "mrag/wire.hpp"

namespace mrag::http {
namespace {

using nlohmann::json;

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server::MockServerOptions options;
    options.lexicon[{Lang::fr, Lang::en}]["chat"] = "cat";
    options.failure_trigger = "EXPLODE";
    options.langid_profiles = std::string(MRAG_DATA_DIR) + "/langid";
    server_ = std::make_unique<server::MockServer>(options);
    server_->start();
  }

  std::shared_ptr<const JsonTransport> transport(int attempts = 3) {
    clients::ServicePolicy p;
    p.attempts = attempts;
    p.initial_backoff = std::chrono::milliseconds(1);
    p.timeout = std::chrono::milliseconds(5000);
    return std::make_shared<JsonTransport>(Endpoint::parse(server_->url()), p, std::nullopt);
  }

  std::unique_ptr<server::MockServer> server_;
};

TEST(EndpointTest, Parse) {
  auto e = Endpoint::parse("http://localhost:8000/api/");
  EXPECT_EQ(e.scheme_host_port, "http://localhost:8000");
  EXPECT_EQ(e.path_prefix, "/api");
  EXPECT_THROW(Endpoint::parse("ftp://x"), ConfigError);
  EXPECT_THROW(Endpoint::parse("localhost:8000"), ConfigError);
}

TEST(WireTest, RequestShapes) {
  std::vector<std::string> texts{"a", "b"};
  EXPECT_EQ(wire::embed_request(texts), json::parse(R"({"texts":["a","b"]})"));
  std::vector<corpus::Passage> ps{{"p1", "d", "T", "x", Lang::en, 0}};
  EXPECT_EQ(wire::rerank_request("q", ps), json::parse(R"({"query":"q","documents":[{"id":"p1","text":"T\nx"}]})"));
  clients::ChatRequest chat{{{clients::Role::system, "s"}, {clients::Role::user, "u"}}, 128};
  EXPECT_EQ(wire::chat_request(chat),
            json::parse(R"({"messages":[{"role":"system","content":"s"},{"role":"user","content":"u"}],)"
                        R"("max_new_tokens":128,"temperature":0})"));
  EXPECT_EQ(wire::translate_request("chat", Lang::fr, Lang::en),
            json::parse(R"({"text":"chat","source":"fr","target":"en"})"));
  EXPECT_EQ(wire::identify_request("hi"), json::parse(R"({"text":"hi"})"));
}

TEST(WireTest, EmbedResponseValidation) {
  auto body = json::parse(R"({"vectors":[[1,0],[0,1]],"dims":2})");
  EXPECT_EQ(wire::parse_embed_response(body, 2).size(), 2u);
  EXPECT_THROW(wire::parse_embed_response(body, 3), ServiceError);
  EXPECT_THROW(wire::parse_embed_response(json::parse(R"({"vectors":[[1,0],[0]],"dims":2})"), 2), ServiceError);
}

TEST(WireTest, RerankResponseRealignsById) {
  std::vector<corpus::Passage> ps{{"a", "d", "T", "x", Lang::en, 0}, {"b", "d", "T", "y", Lang::en, 1}};
  auto scores = wire::parse_rerank_response(json::parse(R"({"scores":[{"id":"b","score":0.2},{"id":"a","score":0.9}]})"), ps);
  ASSERT_EQ(scores.size(), 2u);
  EXPECT_EQ(scores[0].passage_id, "a");
  EXPECT_DOUBLE_EQ(scores[0].score, 0.9);
  EXPECT_THROW(wire::parse_rerank_response(json::parse(R"({"scores":[{"id":"a","score":0.9}]})"), ps), ServiceError);
  EXPECT_THROW(wire::parse_rerank_response(
                   json::parse(R"({"scores":[{"id":"a","score":1},{"id":"z","score":0.9}]})"), ps),
               ServiceError);
}

TEST_F(HttpTest, EmbedMatchesInProcessMock) {
  HttpEmbedder remote(transport(), "mock-embedder:hash3:dims=64:seed=0");
  mocks::MockEmbedder local;
  std::vector<std::string> texts{"hello", "Der Gründer von Berlin", "東京"};
  auto a = remote.embed(texts);
  auto b = local.embed(texts);
  EXPECT_EQ(a, b);
  EXPECT_EQ(server_->requests(wire::kEmbedPath), 1u);
}

TEST_F(HttpTest, RerankChatTranslateIdentify) {
  std::vector<corpus::Passage> ps{{"p1", "d", "Woods", "A red fox ran.", Lang::en, 0},
                                  {"p2", "d", "Ocean", "Blue whales sing.", Lang::en, 0}};
  HttpReranker reranker(transport(), "r");
  EXPECT_EQ(reranker.rerank("red fox", ps), mocks::MockReranker().rerank("red fox", ps));

  HttpGenerator generator(transport(), "g");
  prompting::ContextSet ctx{"q", {ps[0]}};
  auto req = prompting::build_chat("Reply short.", prompting::format_context(ctx), "Which fox ran?", 128);
  EXPECT_EQ(generator.generate(req), "A red fox ran.");

  HttpTranslator translator(transport(), "t");
  EXPECT_EQ(translator.translate("le chat", Lang::fr, Lang::en), "le cat");

  langid::ExternalIdentifier identifier(transport());
  auto v = identifier.identify("Москва является столицей России и крупнейшим городом страны.");
  ASSERT_TRUE(v.lang.has_value());
  EXPECT_EQ(*v.lang, Lang::ru);
  EXPECT_EQ(v.method, langid::Method::external);
}

TEST_F(HttpTest, RetriesTransientFailures) {
  server_->inject_failures(wire::kEmbedPath, 503, 2);
  HttpEmbedder remote(transport(3), "e");
  std::vector<std::string> texts{"x"};
  EXPECT_EQ(remote.embed(texts).size(), 1u);
  EXPECT_EQ(server_->requests(wire::kEmbedPath), 3u);
}

TEST_F(HttpTest, GivesUpAfterAttempts) {
  server_->inject_failures(wire::kChatPath, 429, 10);
  HttpGenerator generator(transport(3), "g");
  clients::ChatRequest req{{{clients::Role::user, "q?"}}};
  try {
    generator.generate(req);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_TRUE(e.retryable());
  }
  EXPECT_EQ(server_->requests(wire::kChatPath), 3u);
}

TEST_F(HttpTest, ClientErrorsAreNotRetried) {
  HttpGenerator generator(transport(3), "g");
  clients::ChatRequest req{{{clients::Role::user, "EXPLODE?"}}};
  try {
    generator.generate(req);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_FALSE(e.retryable());
  }
  EXPECT_EQ(server_->requests(wire::kChatPath), 1u);

  HttpTranslator translator(transport(), "t");
  EXPECT_THROW(translator.translate("x", Lang::de, Lang::en), ServiceError);
}

TEST_F(HttpTest, ContextLengthIsSurfaced) {
  server_->inject_failures(wire::kChatPath, 413, 1);
  HttpGenerator generator(transport(), "g");
  clients::ChatRequest req{{{clients::Role::user, "a long prompt?"}}};
  EXPECT_THROW(generator.generate(req), ContextLengthError);
}

TEST_F(HttpTest, RerankCountMismatchIsAnError) {
  server_->set_response_hook(wire::kRerankPath, [](json& body) { body["scores"].erase(body["scores"].size() - 1); });
  std::vector<corpus::Passage> ps{{"p1", "d", "T", "a", Lang::en, 0}, {"p2", "d", "T", "b", Lang::en, 0}};
  HttpReranker reranker(transport(), "r");
  EXPECT_THROW(reranker.rerank("a", ps), ServiceError);
}

TEST_F(HttpTest, UnreachableEndpointIsRetryable) {
  auto url = server_->url();
  server_->stop();
  clients::ServicePolicy p;
  p.attempts = 2;
  p.initial_backoff = std::chrono::milliseconds(1);
  p.timeout = std::chrono::milliseconds(500);
  HttpEmbedder remote(std::make_shared<JsonTransport>(Endpoint::parse(url), p, std::nullopt), "e");
  std::vector<std::string> texts{"x"};
  try {
    remote.embed(texts);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_TRUE(e.retryable());
  }
}

}  // namespace
}  // namespace mrag::http
