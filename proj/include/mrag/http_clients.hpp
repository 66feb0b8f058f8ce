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

#include <json.hpp>
#include <memory>
#include <optional>
#include <string>

#include "mrag/clients.hpp"

namespace mrag::http {

// "http://host:port[/prefix]"; the prefix is prepended to every /v1 path.
struct Endpoint {
  std::string scheme_host_port;
  std::string path_prefix;

  static Endpoint parse(std::string_view url);
  std::string url() const { return scheme_host_port + path_prefix; }
};

// POSTs JSON with the retry and in-flight policy applied. Connection failures,
// 429 and 5xx are retryable; 413 maps to ContextLengthError; other statuses
// fail immediately.
class JsonTransport {
 public:
  JsonTransport(Endpoint endpoint, clients::ServicePolicy policy, std::optional<std::string> api_key = {});

  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  const Endpoint& endpoint() const { return endpoint_; }

 private:
  nlohmann::json post_once(const std::string& path, const std::string& body) const;

  Endpoint endpoint_;
  clients::ServicePolicy policy_;
  std::optional<std::string> api_key_;
  mutable clients::InFlightLimiter limiter_;
};

// `identity` names the served model; it defaults to the endpoint URL.
class HttpEmbedder : public clients::Embedder {
 public:
  HttpEmbedder(std::shared_ptr<const JsonTransport> transport, std::string identity);
  std::vector<clients::EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string identity() const override { return identity_; }

 private:
  std::shared_ptr<const JsonTransport> transport_;
  std::string identity_;
};

class HttpReranker : public clients::Reranker {
 public:
  HttpReranker(std::shared_ptr<const JsonTransport> transport, std::string identity);
  std::vector<clients::RerankScore> rerank(std::string_view query,
                                           std::span<const corpus::Passage> candidates) override;
  std::string identity() const override { return identity_; }

 private:
  std::shared_ptr<const JsonTransport> transport_;
  std::string identity_;
};

class HttpGenerator : public clients::Generator {
 public:
  HttpGenerator(std::shared_ptr<const JsonTransport> transport, std::string identity);
  std::string generate(const clients::ChatRequest& request) override;
  std::string identity() const override { return identity_; }

 private:
  std::shared_ptr<const JsonTransport> transport_;
  std::string identity_;
};

class HttpTranslator : public clients::Translator {
 public:
  HttpTranslator(std::shared_ptr<const JsonTransport> transport, std::string identity);
  std::string translate(std::string_view text, Lang source, Lang target) override;
  std::string identity() const override { return identity_; }

 private:
  std::shared_ptr<const JsonTransport> transport_;
  std::string identity_;
};

}  // namespace mrag::http
