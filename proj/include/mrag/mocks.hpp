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

// Deterministic stand-ins for the model services. Every mock is a pure
// function of its inputs and seed, so two processes agree byte-for-byte.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mrag/clients.hpp"

namespace mrag::mocks {

uint64_t stable_hash(std::string_view bytes, uint64_t seed);

// Feature-hashes character 3-grams of the lexical tokens (space padded) into a
// signed bucket vector, then L2-normalizes it.
class MockEmbedder : public clients::Embedder {
 public:
  static constexpr std::size_t kDefaultDims = 64;

  explicit MockEmbedder(uint64_t seed = 0, std::size_t dims = kDefaultDims) : seed_(seed), dims_(dims) {}

  clients::EmbeddingVector embed_one(std::string_view text) const;
  std::vector<clients::EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string identity() const override;

  std::size_t calls() const { return calls_.load(); }

 private:
  uint64_t seed_;
  std::size_t dims_;
  std::atomic<std::size_t> calls_{0};
};

// Fraction of distinct query tokens that occur in the passage tokens.
class MockReranker : public clients::Reranker {
 public:
  static double score(std::string_view query, std::string_view passage_text);

  std::vector<clients::RerankScore> rerank(std::string_view query,
                                           std::span<const corpus::Passage> candidates) override;
  std::string identity() const override { return "mock-reranker:token-overlap"; }

  std::size_t calls() const { return calls_.load(); }

 private:
  std::atomic<std::size_t> calls_{0};
};

// Extractive reader: answers with the context sentence sharing the most
// distinct tokens with the question (earliest wins ties), truncated to
// max_new_tokens whitespace tokens. Without context it returns kNoAnswer.
class MockGenerator : public clients::Generator {
 public:
  static constexpr const char* kNoAnswer = "no answer";

  MockGenerator() = default;
  // Requests whose user message contains `trigger` fail with a
  // non-retryable ServiceError; used to exercise fault isolation.
  explicit MockGenerator(std::string failure_trigger) : failure_trigger_(std::move(failure_trigger)) {}

  std::string generate(const clients::ChatRequest& request) override;
  std::string identity() const override { return "mock-generator:extractive"; }

  std::size_t calls() const { return calls_.load(); }

 private:
  std::string failure_trigger_;
  std::atomic<std::size_t> calls_{0};
};

// (source, target) -> token substitutions.
using Lexicon = std::map<std::pair<Lang, Lang>, std::map<std::string, std::string>>;

// Tab-separated lines: source_lang, target_lang, source_word, target_word.
Lexicon load_lexicon(const std::filesystem::path& path);

// Substitutes lexicon entries token by token (case-insensitive lookup,
// surrounding punctuation kept); unknown tokens pass through. Pairs absent
// from the lexicon are unsupported.
class MockTranslator : public clients::Translator {
 public:
  explicit MockTranslator(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

  std::string translate(std::string_view text, Lang source, Lang target) override;
  std::string identity() const override { return "mock-translator:lexicon"; }

  std::size_t calls() const { return calls_.load(); }

 private:
  Lexicon lexicon_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace mrag::mocks
