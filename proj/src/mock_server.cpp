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

#include "mrag/mock_server.hpp"

#include "mrag/error.hpp"
#include "mrag/wire.hpp"

namespace mrag::server {

using nlohmann::json;

MockServer::MockServer(MockServerOptions options)
    : options_(std::move(options)),
      embedder_(options_.embed_seed, options_.embed_dims),
      generator_(options_.failure_trigger),
      translator_(options_.lexicon) {
  if (!options_.langid_profiles.empty()) {
    identifier_ = std::make_unique<langid::BuiltinIdentifier>(
        langid::BuiltinIdentifier::from_directory(options_.langid_profiles));
  }
  install_routes();
}

MockServer::~MockServer() { stop(); }

int MockServer::start(const std::string& host, int port) {
  port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
  return port_;
}

void MockServer::listen(const std::string& host, int port) {
  port_ = port;
  if (!server_.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

void MockServer::stop() {
  server_.stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::url() const { return "http://127.0.0.1:" + std::to_string(port_); }

void MockServer::inject_failures(const std::string& path, int status, std::size_t count) {
  std::lock_guard lock(mu_);
  failures_[path] = {status, count};
}

void MockServer::set_response_hook(const std::string& path, ResponseHook hook) {
  std::lock_guard lock(mu_);
  hooks_[path] = std::move(hook);
}

std::size_t MockServer::requests(const std::string& path) const {
  std::lock_guard lock(mu_);
  auto it = counts_.find(path);
  return it == counts_.end() ? 0 : it->second;
}

bool MockServer::take_failure(const std::string& path, httplib::Response& res) {
  std::lock_guard lock(mu_);
  ++counts_[path];
  auto it = failures_.find(path);
  if (it == failures_.end() || it->second.second == 0) return false;
  --it->second.second;
  res.status = it->second.first;
  res.set_content(json{{"error", "injected failure"}}.dump(), "application/json");
  return true;
}

void MockServer::respond(const std::string& path, const httplib::Request& req, httplib::Response& res,
                         const std::function<json(const json&)>& handler) {
  if (take_failure(path, res)) return;
  json body;
  try {
    body = handler(json::parse(req.body));
  } catch (const json::exception& e) {
    res.status = 400;
    res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    return;
  } catch (const PreconditionError& e) {
    res.status = 400;
    res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    return;
  } catch (const std::exception& e) {
    res.status = 422;
    res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    return;
  }
  ResponseHook hook;
  {
    std::lock_guard lock(mu_);
    if (auto it = hooks_.find(path); it != hooks_.end()) hook = it->second;
  }
  if (hook) hook(body);
  res.set_content(body.dump(), "application/json");
}

void MockServer::install_routes() {
  server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"status", "ok"}}.dump(), "application/json");
  });
  server_.Post(wire::kEmbedPath, [this](const httplib::Request& req, httplib::Response& res) {
    respond(wire::kEmbedPath, req, res, [this](const json& body) {
      auto texts = wire::parse_embed_request(body);
      return wire::embed_response(embedder_.embed(texts));
    });
  });
  server_.Post(wire::kRerankPath, [this](const httplib::Request& req, httplib::Response& res) {
    respond(wire::kRerankPath, req, res, [](const json& body) {
      auto request = wire::parse_rerank_request(body);
      std::vector<clients::RerankScore> scores;
      for (const auto& d : request.documents) {
        scores.push_back({d.id, mocks::MockReranker::score(request.query, d.text)});
      }
      return wire::rerank_response(scores);
    });
  });
  server_.Post(wire::kChatPath, [this](const httplib::Request& req, httplib::Response& res) {
    respond(wire::kChatPath, req, res,
            [this](const json& body) { return wire::text_response(generator_.generate(wire::parse_chat_request(body))); });
  });
  server_.Post(wire::kTranslatePath, [this](const httplib::Request& req, httplib::Response& res) {
    respond(wire::kTranslatePath, req, res, [this](const json& body) {
      auto r = wire::parse_translate_request(body);
      return wire::text_response(translator_.translate(r.text, r.source, r.target));
    });
  });
  server_.Post(wire::kIdentifyPath, [this](const httplib::Request& req, httplib::Response& res) {
    respond(wire::kIdentifyPath, req, res, [this](const json& body) {
      auto text = wire::parse_identify_request(body);
      if (!identifier_) return wire::identify_response("unknown", 0.0);
      auto v = identifier_->identify(text);
      return wire::identify_response(v.lang ? to_string(*v.lang) : "unknown", v.confidence);
    });
  });
}

}  // namespace mrag::server
