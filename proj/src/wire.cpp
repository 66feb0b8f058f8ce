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

#include "mrag/wire.hpp"

#include <cmath>
#include <unordered_map>

namespace mrag::wire {

namespace {

const json& field(const json& body, const char* name) {
  if (!body.is_object() || !body.contains(name)) {
    throw PreconditionError(std::string("request missing field '") + name + "'");
  }
  return body.at(name);
}

std::string string_field(const json& body, const char* name) {
  const auto& v = field(body, name);
  if (!v.is_string()) throw PreconditionError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

Lang lang_field(const json& body, const char* name) {
  auto code = string_field(body, name);
  auto lang = try_parse_language(code);
  if (!lang) throw PreconditionError("unsupported language '" + code + "'");
  return *lang;
}

[[noreturn]] void bad_response(const std::string& what) {
  throw ServiceError("malformed service response: " + what, false);
}

}  // namespace

json embed_request(std::span<const std::string> texts) {
  return json{{"texts", json(std::vector<std::string>(texts.begin(), texts.end()))}};
}

std::vector<std::string> parse_embed_request(const json& body) {
  const auto& texts = field(body, "texts");
  if (!texts.is_array()) throw PreconditionError("'texts' must be a list");
  std::vector<std::string> out;
  for (const auto& t : texts) {
    if (!t.is_string()) throw PreconditionError("'texts' entries must be strings");
    out.push_back(t.get<std::string>());
  }
  return out;
}

json embed_response(const std::vector<clients::EmbeddingVector>& vectors) {
  json rows = json::array();
  for (const auto& v : vectors) rows.push_back(v.values);
  return json{{"vectors", rows}, {"dims", vectors.empty() ? 0 : vectors.front().dims()}};
}

std::vector<clients::EmbeddingVector> parse_embed_response(const json& body, std::size_t expected_count) {
  if (!body.is_object() || !body.contains("vectors") || !body["vectors"].is_array()) {
    bad_response("embed: missing 'vectors'");
  }
  const auto& rows = body["vectors"];
  if (rows.size() != expected_count) {
    bad_response("embed: expected " + std::to_string(expected_count) + " vectors, got " +
                 std::to_string(rows.size()));
  }
  std::vector<clients::EmbeddingVector> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.is_array()) bad_response("embed: vector is not a list");
    clients::EmbeddingVector v;
    v.values.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) bad_response("embed: non-numeric component");
      auto f = x.get<double>();
      if (!std::isfinite(f)) bad_response("embed: non-finite component");
      v.values.push_back(static_cast<float>(f));
    }
    if (!out.empty() && v.dims() != out.front().dims()) bad_response("embed: ragged vector dims");
    out.push_back(std::move(v));
  }
  if (body.contains("dims") && !out.empty() && body["dims"].get<std::size_t>() != out.front().dims()) {
    bad_response("embed: 'dims' disagrees with vectors");
  }
  return out;
}

json rerank_request(std::string_view query, std::span<const corpus::Passage> candidates) {
  json docs = json::array();
  for (const auto& p : candidates) docs.push_back({{"id", p.passage_id}, {"text", corpus::joined_text(p)}});
  return json{{"query", std::string(query)}, {"documents", docs}};
}

RerankRequest parse_rerank_request(const json& body) {
  RerankRequest req;
  req.query = string_field(body, "query");
  const auto& docs = field(body, "documents");
  if (!docs.is_array()) throw PreconditionError("'documents' must be a list");
  for (const auto& d : docs) req.documents.push_back({string_field(d, "id"), string_field(d, "text")});
  return req;
}

json rerank_response(const std::vector<clients::RerankScore>& scores) {
  json rows = json::array();
  for (const auto& s : scores) rows.push_back({{"id", s.passage_id}, {"score", s.score}});
  return json{{"scores", rows}};
}

std::vector<clients::RerankScore> parse_rerank_response(const json& body,
                                                        std::span<const corpus::Passage> candidates) {
  if (!body.is_object() || !body.contains("scores") || !body["scores"].is_array()) {
    bad_response("rerank: missing 'scores'");
  }
  const auto& rows = body["scores"];
  if (rows.size() != candidates.size()) {
    bad_response("rerank: count mismatch, sent " + std::to_string(candidates.size()) + ", got " +
                 std::to_string(rows.size()));
  }
  std::unordered_map<std::string, double> by_id;
  for (const auto& row : rows) {
    if (!row.contains("id") || !row.contains("score") || !row["score"].is_number()) {
      bad_response("rerank: score entry needs 'id' and numeric 'score'");
    }
    auto score = row["score"].get<double>();
    if (!std::isfinite(score)) bad_response("rerank: non-finite score");
    by_id[row["id"].get<std::string>()] = score;
  }
  std::vector<clients::RerankScore> out;
  out.reserve(candidates.size());
  for (const auto& p : candidates) {
    auto it = by_id.find(p.passage_id);
    if (it == by_id.end()) bad_response("rerank: no score for '" + p.passage_id + "'");
    out.push_back({p.passage_id, it->second});
  }
  return out;
}

json chat_request(const clients::ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(clients::to_string(m.role))}, {"content", m.content}});
  }
  return json{{"messages", messages},
              {"max_new_tokens", request.max_new_tokens},
              {"temperature", request.greedy ? 0.0 : 1.0}};
}

clients::ChatRequest parse_chat_request(const json& body) {
  clients::ChatRequest req;
  const auto& messages = field(body, "messages");
  if (!messages.is_array()) throw PreconditionError("'messages' must be a list");
  for (const auto& m : messages) {
    auto role = string_field(m, "role");
    if (role != "system" && role != "user") throw PreconditionError("unsupported role '" + role + "'");
    req.messages.push_back({role == "system" ? clients::Role::system : clients::Role::user,
                            string_field(m, "content")});
  }
  if (body.contains("max_new_tokens")) req.max_new_tokens = body["max_new_tokens"].get<int>();
  if (body.contains("temperature")) req.greedy = body["temperature"].get<double>() == 0.0;
  clients::validate(req);
  return req;
}

json translate_request(std::string_view text, Lang source, Lang target) {
  return json{{"text", std::string(text)},
              {"source", std::string(to_string(source))},
              {"target", std::string(to_string(target))}};
}

TranslateRequest parse_translate_request(const json& body) {
  return {string_field(body, "text"), lang_field(body, "source"), lang_field(body, "target")};
}

json identify_request(std::string_view text) { return json{{"text", std::string(text)}}; }

std::string parse_identify_request(const json& body) { return string_field(body, "text"); }

json text_response(std::string_view text) { return json{{"text", std::string(text)}}; }

std::string parse_text_response(const json& body) {
  if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
    bad_response("missing 'text'");
  }
  return body["text"].get<std::string>();
}

json identify_response(std::string_view lang, double confidence) {
  return json{{"lang", lang}, {"confidence", confidence}};
}

}  // namespace mrag::wire
