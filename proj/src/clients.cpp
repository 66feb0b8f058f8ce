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

#include "mrag/clients.hpp"

#include <algorithm>

namespace mrag::clients {

void sort_by_relevance(std::vector<RerankScore>& scores) {
  std::sort(scores.begin(), scores.end(), [](const RerankScore& a, const RerankScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.passage_id < b.passage_id;
  });
}

std::string_view to_string(Role role) { return role == Role::system ? "system" : "user"; }

void validate(const ChatRequest& request) {
  if (request.messages.empty()) throw PreconditionError("chat request has no messages");
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    const auto& m = request.messages[i];
    if (m.content.empty()) throw PreconditionError("chat message " + std::to_string(i) + " is empty");
    if (m.role == Role::system && i != 0) {
      throw PreconditionError("system message must be first and unique");
    }
  }
  if (request.max_new_tokens <= 0) throw PreconditionError("max_new_tokens must be positive");
}

std::size_t prompt_chars(const ChatRequest& request) {
  std::size_t n = 0;
  for (const auto& m : request.messages) n += m.content.size();
  return n;
}

void check_embed_batch(std::span<const std::string> texts) {
  if (texts.empty()) throw PreconditionError("embed: empty batch");
  for (const auto& t : texts) {
    if (t.empty()) throw PreconditionError("embed: empty text in batch");
  }
}

void check_rerank_batch(std::span<const corpus::Passage> candidates) {
  if (candidates.empty()) throw PreconditionError("rerank: no candidates");
}

void check_translate_pair(Lang source, Lang target) {
  if (source == target) {
    throw PreconditionError("translate: source and target are both " + std::string(mrag::to_string(source)));
  }
}

}  // namespace mrag::clients
