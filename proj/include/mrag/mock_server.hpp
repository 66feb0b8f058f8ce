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

// HTTP server speaking the service wire contract, backed by the in-process
// mocks. Used by tests and by `mrag serve-mocks`.

#include <httplib.h>

#include <functional>
#include <json.hpp>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "mrag/langid.hpp"
#include "mrag/mocks.hpp"

namespace mrag::server {

struct MockServerOptions {
  uint64_t embed_seed = 0;
  std::size_t embed_dims = mocks::MockEmbedder::kDefaultDims;
  mocks::Lexicon lexicon;
  std::string failure_trigger;
  std::filesystem::path langid_profiles;  // empty: identify answers unknown
};

class MockServer {
 public:
  using ResponseHook = std::function<void(nlohmann::json&)>;

  explicit MockServer(MockServerOptions options = {});
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Binds host:port (0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

  int port() const { return port_; }
  std::string url() const;

  // The next `count` requests to `path` answer `status` with an error body.
  void inject_failures(const std::string& path, int status, std::size_t count);
  // Mutates successful response bodies for `path` before they are sent.
  void set_response_hook(const std::string& path, ResponseHook hook);
  std::size_t requests(const std::string& path) const;

 private:
  void install_routes();
  bool take_failure(const std::string& path, httplib::Response& res);
  void respond(const std::string& path, const httplib::Request& req, httplib::Response& res,
               const std::function<nlohmann::json(const nlohmann::json&)>& handler);

  MockServerOptions options_;
  mocks::MockEmbedder embedder_;
  mocks::MockGenerator generator_;
  mocks::MockTranslator translator_;
  std::unique_ptr<langid::BuiltinIdentifier> identifier_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mu_;
  std::map<std::string, std::pair<int, std::size_t>> failures_;
  std::map<std::string, ResponseHook> hooks_;
  std::map<std::string, std::size_t> counts_;
};

}  // namespace mrag::server
