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

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mrag/clients.hpp"
#include "mrag/corpus.hpp"
#include "mrag/error.hpp"

namespace mrag::index {

inline constexpr int kIndexFormatVersion = 1;
inline constexpr std::size_t kDefaultTopK = 50;
inline constexpr const char* kEmbedTextPolicy = "title + \"\\n\" + text";

struct IndexManifest {
  int format_version = kIndexFormatVersion;
  std::string collection_id;
  std::set<Lang> langs;
  std::size_t dims = 0;
  std::size_t count = 0;
  std::string embed_service;
  std::string embed_text_policy = kEmbedTextPolicy;
  // Vectors are stored exactly as the service returned them; scores are raw
  // inner products, so cosine only if the service normalizes.
  std::string normalization = "as returned by service";
  std::string checksum;

  bool operator==(const IndexManifest&) const = default;
};

struct Candidate {
  std::string passage_id;
  double score = 0.0;

  bool operator==(const Candidate&) const = default;
};

// Sorted by (score desc, passage_id asc); at most K entries.
struct CandidateSet {
  std::string query_id;
  std::vector<Candidate> ranked;

  bool operator==(const CandidateSet&) const = default;
};

// Inner product accumulated in double, in dimension order. Every score the
// index reports comes from this function.
double inner_product(std::span<const float> a, std::span<const float> b);

// Exact dense index: flat row-major float32 vectors plus passage ids.
class DenseIndex {
 public:
  DenseIndex() = default;
  DenseIndex(IndexManifest manifest, std::vector<std::string> ids, std::vector<float> vectors);

  const IndexManifest& manifest() const { return manifest_; }
  std::size_t size() const { return ids_.size(); }
  std::size_t dims() const { return manifest_.dims; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  std::span<const float> vector(std::size_t i) const {
    return std::span<const float>(vectors_).subspan(i * manifest_.dims, manifest_.dims);
  }

  // Exact top-K by inner product, ties by passage_id. The scan is split
  // into `threads` contiguous blocks whose partial results merge under the
  // same total order, so the output does not depend on the thread count.
  CandidateSet search(std::span<const float> query, std::size_t top_k, unsigned threads = 1) const;

  // manifest.json, vectors.f32 (little-endian float32, row-major), ids.txt.
  void save(const std::filesystem::path& dir);
  static DenseIndex open(const std::filesystem::path& dir);

 private:
  IndexManifest manifest_;
  std::vector<std::string> ids_;
  std::vector<float> vectors_;
};

std::string embed_text(const corpus::Passage& passage);

struct BuildOptions {
  std::size_t batch_size = 32;
  // Batches fetched concurrently; results are written in collection order.
  std::size_t parallel_batches = 1;
  // Continue from a checkpoint left by an interrupted build.
  bool resume = false;
};

// The embedding service failed after retries; the checkpoint holds the
// first `completed` passages and the build can resume.
class BuildSuspended : public Error {
 public:
  BuildSuspended(std::size_t completed, const std::string& cause)
      : Error("index build suspended after " + std::to_string(completed) + " passages: " + cause),
        completed_(completed) {}

  std::size_t completed() const { return completed_; }

 private:
  std::size_t completed_;
};

// Embeds every passage into `dir`, checkpointing after each wave of batches.
DenseIndex build_index(const corpus::Collection& collection, clients::Embedder& embedder,
                       const std::filesystem::path& dir, const BuildOptions& options = {});

// Union of indexes that share dims and embedding service and have disjoint ids.
DenseIndex merge_indexes(std::span<const DenseIndex> parts);

}  // namespace mrag::index
