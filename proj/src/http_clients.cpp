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

#include "mrag/http_clients.hpp"

#include <httplib.h>

#include "mrag/wire.hpp"

namespace mrag::http {

using nlohmann::json;

Endpoint Endpoint::parse(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || url.substr(0, scheme_end) != "http") {
    throw ConfigError("endpoint must be an http:// URL: '" + std::string(url) + "'");
  }
  auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.scheme_host_port = std::string(url.substr(0, path_start));
  if (path_start != std::string_view::npos) {
    e.path_prefix = std::string(url.substr(path_start));
    while (!e.path_prefix.empty() && e.path_prefix.back() == '/') e.path_prefix.pop_back();
  }
  if (e.scheme_host_port.size() <= scheme_end + 3) throw ConfigError("endpoint has no host: '" + std::string(url) + "'");
  return e;
}

JsonTransport::JsonTransport(Endpoint endpoint, clients::ServicePolicy policy, std::optional<std::string> api_key)
    : endpoint_(std::move(endpoint)), policy_(policy), api_key_(std::move(api_key)), limiter_(policy.max_in_flight) {}

json JsonTransport::post(const std::string& path, const json& body) const {
  auto payload = body.dump();
  auto slot = limiter_.acquire();
  return clients::with_retries(policy_, [&] { return post_once(path, payload); });
}

json JsonTransport::post_once(const std::string& path, const std::string& body) const {
  httplib::Client client(endpoint_.scheme_host_port);
  auto secs = policy_.timeout.count() / 1000;
  auto usecs = (policy_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);

  const auto url = endpoint_.path_prefix + path;
  auto res = client.Post(url, headers, body, "application/json");
  if (!res) {
    throw ServiceError(endpoint_.url() + path + " unreachable: " + httplib::to_string(res.error()), true);
  }
  if (res->status == 413 || res->body.find("context_length_exceeded") != std::string::npos) {
    throw ContextLengthError(endpoint_.url() + path + ": context length exceeded", body.size());
  }
  if (res->status == 429 || res->status >= 500) {
    throw ServiceError(endpoint_.url() + path + " returned " + std::to_string(res->status), true);
  }
  if (res->status != 200) {
    throw ServiceError(endpoint_.url() + path + " returned " + std::to_string(res->status) + ": " + res->body,
                       false);
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw ServiceError(endpoint_.url() + path + " returned invalid JSON: " + e.what(), false);
  }
}

HttpEmbedder::HttpEmbedder(std::shared_ptr<const JsonTransport> transport, std::string identity)
    : transport_(std::move(transport)), identity_(std::move(identity)) {}

std::vector<clients::EmbeddingVector> HttpEmbedder::embed(std::span<const std::string> texts) {
  clients::check_embed_batch(texts);
  return wire::parse_embed_response(transport_->post(wire::kEmbedPath, wire::embed_request(texts)), texts.size());
}

HttpReranker::HttpReranker(std::shared_ptr<const JsonTransport> transport, std::string identity)
    : transport_(std::move(transport)), identity_(std::move(identity)) {}

std::vector<clients::RerankScore> HttpReranker::rerank(std::string_view query,
                                                       std::span<const corpus::Passage> candidates) {
  clients::check_rerank_batch(candidates);
  return wire::parse_rerank_response(transport_->post(wire::kRerankPath, wire::rerank_request(query, candidates)),
                                     candidates);
}

HttpGenerator::HttpGenerator(std::shared_ptr<const JsonTransport> transport, std::string identity)
    : transport_(std::move(transport)), identity_(std::move(identity)) {}

std::string HttpGenerator::generate(const clients::ChatRequest& request) {
  clients::validate(request);
  try {
    return wire::parse_text_response(transport_->post(wire::kChatPath, wire::chat_request(request)));
  } catch (const ContextLengthError&) {
    throw ContextLengthError("chat: context length exceeded", clients::prompt_chars(request));
  }
}

HttpTranslator::HttpTranslator(std::shared_ptr<const JsonTransport> transport, std::string identity)
    : transport_(std::move(transport)), identity_(std::move(identity)) {}

std::string HttpTranslator::translate(std::string_view text, Lang source, Lang target) {
  clients::check_translate_pair(source, target);
  return wire::parse_text_response(
      transport_->post(wire::kTranslatePath, wire::translate_request(text, source, target)));
}

}  // namespace mrag::http
