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

#include <atomic>
#include <chrono>
#include <cstddef>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mrag/corpus.hpp"
#include "mrag/error.hpp"
#include "mrag/language.hpp"

namespace mrag::clients {

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dims() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

struct RerankScore {
  std::string passage_id;
  double score = 0.0;

  bool operator==(const RerankScore&) const = default;
};

// Descending score, ties by passage_id ascending.
void sort_by_relevance(std::vector<RerankScore>& scores);

enum class Role { system, user };

std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

inline constexpr int kDefaultMaxNewTokens = 128;

struct ChatRequest {
  std::vector<ChatMessage> messages;
  int max_new_tokens = kDefaultMaxNewTokens;
  bool greedy = true;

  bool operator==(const ChatRequest&) const = default;
};

// Throws PreconditionError: empty message list, empty content, a system
// message anywhere but first, or a non-positive token budget.
void validate(const ChatRequest& request);

std::size_t prompt_chars(const ChatRequest& request);

// R1: independent encoder for queries and passages.
class Embedder {
 public:
  virtual ~Embedder() = default;
  // One vector per input, same order, all the same dims.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
  // Recorded in index manifests; query-time services must match it.
  virtual std::string identity() const = 0;
};

// R2: joint (query, passage) scorer. Scores align index-for-index with the
// candidates; the caller sorts.
class Reranker {
 public:
  virtual ~Reranker() = default;
  virtual std::vector<RerankScore> rerank(std::string_view query,
                                          std::span<const corpus::Passage> candidates) = 0;
  virtual std::string identity() const = 0;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string generate(const ChatRequest& request) = 0;
  virtual std::string identity() const = 0;
};

class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string translate(std::string_view text, Lang source, Lang target) = 0;
  virtual std::string identity() const = 0;
};

// Precondition checks shared by every implementation.
void check_embed_batch(std::span<const std::string> texts);
void check_rerank_batch(std::span<const corpus::Passage> candidates);
void check_translate_pair(Lang source, Lang target);

struct ServicePolicy {
  std::size_t max_in_flight = 8;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::milliseconds timeout{60000};
};

// Bounds simultaneous requests to one service.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t limit) : slots_(static_cast<std::ptrdiff_t>(limit ? limit : 1)) {}

  class Slot {
   public:
    explicit Slot(InFlightLimiter& owner) : owner_(owner) { owner_.slots_.acquire(); }
    ~Slot() { owner_.slots_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    InFlightLimiter& owner_;
  };

  Slot acquire() { return Slot(*this); }

 private:
  std::counting_semaphore<1 << 16> slots_;
};

// Runs `call`, retrying retryable ServiceErrors with exponential backoff.
template <typename F>
auto with_retries(const ServicePolicy& policy, F&& call) -> decltype(call()) {
  auto backoff = policy.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return call();
    } catch (const ServiceError& e) {
      if (!e.retryable() || attempt >= policy.attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace mrag::clients
