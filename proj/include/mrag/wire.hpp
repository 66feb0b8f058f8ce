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

// JSON bodies of the service wire contract:
//   POST /v1/embed      {"texts":[...]}                      -> {"vectors":[[...]], "dims":n}
//   POST /v1/rerank     {"query":..., "documents":[{"id","text"}]} -> {"scores":[{"id","score"}]}
//   POST /v1/chat       {"messages":[{"role","content"}], "max_new_tokens":n, "temperature":0}
//                                                            -> {"text":...}
//   POST /v1/translate  {"text":..., "source":"fr", "target":"en"} -> {"text":...}
//   POST /v1/identify   {"text":...}                         -> {"lang":..., "confidence":f}
// Request parsers throw PreconditionError; response parsers throw
// non-retryable ServiceError.

#include <json.hpp>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mrag/clients.hpp"

namespace mrag::wire {

using nlohmann::json;

inline constexpr const char* kEmbedPath = "/v1/embed";
inline constexpr const char* kRerankPath = "/v1/rerank";
inline constexpr const char* kChatPath = "/v1/chat";
inline constexpr const char* kTranslatePath = "/v1/translate";
inline constexpr const char* kIdentifyPath = "/v1/identify";

json embed_request(std::span<const std::string> texts);
std::vector<std::string> parse_embed_request(const json& body);
json embed_response(const std::vector<clients::EmbeddingVector>& vectors);
std::vector<clients::EmbeddingVector> parse_embed_response(const json& body, std::size_t expected_count);

struct RerankDocument {
  std::string id;
  std::string text;
};
struct RerankRequest {
  std::string query;
  std::vector<RerankDocument> documents;
};
// Documents carry the title-joined passage text.
json rerank_request(std::string_view query, std::span<const corpus::Passage> candidates);
RerankRequest parse_rerank_request(const json& body);
json rerank_response(const std::vector<clients::RerankScore>& scores);
// Realigns scores to candidate order; rejects count or id mismatches.
std::vector<clients::RerankScore> parse_rerank_response(const json& body,
                                                        std::span<const corpus::Passage> candidates);

json chat_request(const clients::ChatRequest& request);
clients::ChatRequest parse_chat_request(const json& body);

struct TranslateRequest {
  std::string text;
  Lang source = Lang::en;
  Lang target = Lang::en;
};
json translate_request(std::string_view text, Lang source, Lang target);
TranslateRequest parse_translate_request(const json& body);

json identify_request(std::string_view text);
std::string parse_identify_request(const json& body);
json identify_response(std::string_view lang, double confidence);

json text_response(std::string_view text);
std::string parse_text_response(const json& body);

}  // namespace mrag::wire
