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

#include "mrag/index.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <future>
#include <json.hpp>
#include <queue>
#include <thread>
#include <unordered_set>

#include "mrag/io.hpp"

namespace mrag::index {

namespace fs = std::filesystem;
using nlohmann::json;

double inner_product(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

std::string embed_text(const corpus::Passage& passage) { return corpus::joined_text(passage); }

DenseIndex::DenseIndex(IndexManifest manifest, std::vector<std::string> ids, std::vector<float> vectors)
    : manifest_(std::move(manifest)), ids_(std::move(ids)), vectors_(std::move(vectors)) {
  if (vectors_.size() != ids_.size() * manifest_.dims) {
    throw CorruptionError("index vector storage does not match " + std::to_string(ids_.size()) + " x " +
                          std::to_string(manifest_.dims));
  }
  manifest_.count = ids_.size();
}

namespace {

struct Hit {
  double score;
  std::size_t row;
};

// Total order used everywhere: higher score first, then smaller id.
struct Better {
  const std::vector<std::string>* ids;
  bool operator()(const Hit& a, const Hit& b) const {
    if (a.score != b.score) return a.score > b.score;
    return (*ids)[a.row] < (*ids)[b.row];
  }
};

std::vector<Hit> scan_block(const DenseIndex& idx, std::span<const float> query, std::size_t begin, std::size_t end,
                            std::size_t top_k, const Better& better) {
  // Max-heap under `better`: the top is the worst hit kept so far.
  std::priority_queue<Hit, std::vector<Hit>, Better> heap(better);
  for (std::size_t row = begin; row < end; ++row) {
    Hit h{inner_product(query, idx.vector(row)), row};
    if (heap.size() < top_k) {
      heap.push(h);
    } else if (better(h, heap.top())) {
      heap.pop();
      heap.push(h);
    }
  }
  std::vector<Hit> out;
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  return out;
}

std::string hex32(uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::string_view as_bytes(const std::vector<float>& v) {
  return {reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float)};
}

std::string ids_blob(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += id + "\n";
  return out;
}

json manifest_json(const IndexManifest& m) {
  json langs = json::array();
  for (auto l : m.langs) langs.push_back(to_string(l));
  return json{{"format_version", m.format_version},
              {"collection_id", m.collection_id},
              {"langs", langs},
              {"dims", m.dims},
              {"count", m.count},
              {"embed_service", m.embed_service},
              {"embed_text_policy", m.embed_text_policy},
              {"normalization", m.normalization},
              {"checksum", m.checksum}};
}

IndexManifest manifest_from(const json& obj) {
  IndexManifest m;
  m.format_version = obj.at("format_version");
  m.collection_id = obj.at("collection_id");
  for (const auto& l : obj.at("langs")) m.langs.insert(parse_language(l.get<std::string>()));
  m.dims = obj.at("dims");
  m.count = obj.at("count");
  m.embed_service = obj.at("embed_service");
  m.embed_text_policy = obj.at("embed_text_policy");
  m.normalization = obj.value("normalization", "");
  m.checksum = obj.at("checksum");
  return m;
}

}  // namespace

CandidateSet DenseIndex::search(std::span<const float> query, std::size_t top_k, unsigned threads) const {
  if (query.size() != dims()) throw DimsMismatchError(dims(), query.size());
  if (top_k == 0) throw PreconditionError("search: K must be at least 1");
  const Better better{&ids_};
  const std::size_t n = size();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, n / 4096))));

  std::vector<Hit> merged;
  if (threads == 1) {
    merged = scan_block(*this, query, 0, n, top_k, better);
  } else {
    std::vector<std::future<std::vector<Hit>>> parts;
    const std::size_t block = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      auto begin = std::min(n, t * block);
      auto end = std::min(n, begin + block);
      parts.push_back(std::async(std::launch::async, [&, begin, end] {
        return scan_block(*this, query, begin, end, top_k, better);
      }));
    }
    for (auto& f : parts) {
      auto hits = f.get();
      merged.insert(merged.end(), hits.begin(), hits.end());
    }
  }
  std::sort(merged.begin(), merged.end(), better);
  if (merged.size() > top_k) merged.resize(top_k);

  CandidateSet out;
  out.ranked.reserve(merged.size());
  for (const auto& h : merged) out.ranked.push_back({ids_[h.row], h.score});
  return out;
}

void DenseIndex::save(const fs::path& dir) {
  fs::create_directories(dir);
  auto ids = ids_blob(ids_);
  manifest_.count = ids_.size();
  manifest_.checksum = hex32(io::crc32(ids, io::crc32(as_bytes(vectors_))));
  io::write_file_atomic(dir / "vectors.f32", as_bytes(vectors_));
  io::write_file_atomic(dir / "ids.txt", ids);
  io::write_file_atomic(dir / "manifest.json", manifest_json(manifest_).dump(2) + "\n");
}

DenseIndex DenseIndex::open(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) throw IoError("no dense index at " + dir.string());
  IndexManifest m;
  try {
    m = manifest_from(json::parse(io::read_file(dir / "manifest.json")));
  } catch (const json::exception& e) {
    throw CorruptionError("index manifest unreadable: " + std::string(e.what()));
  }
  if (m.format_version != kIndexFormatVersion) {
    throw VersionError("index format " + std::to_string(m.format_version) + " is not supported");
  }
  auto raw = io::read_file(dir / "vectors.f32");
  auto ids_raw = io::read_file(dir / "ids.txt");
  if (hex32(io::crc32(ids_raw, io::crc32(raw))) != m.checksum) {
    throw CorruptionError("index checksum mismatch in " + dir.string());
  }
  if (raw.size() != m.count * m.dims * sizeof(float)) throw CorruptionError("vector file size mismatch");
  std::vector<float> vectors(m.count * m.dims);
  std::memcpy(vectors.data(), raw.data(), raw.size());
  auto ids = io::split_lines(ids_raw).lines;
  if (ids.size() != m.count) throw CorruptionError("id file does not match manifest count");
  return DenseIndex(std::move(m), std::move(ids), std::move(vectors));
}

namespace {

std::string collection_fingerprint(const corpus::Collection& c) {
  uint32_t crc = 0;
  for (const auto& p : c.passages) {
    crc = io::crc32(p.passage_id + "\x1f" + embed_text(p) + "\x1e", crc);
  }
  return hex32(crc);
}

struct Checkpoint {
  std::string fingerprint;
  std::string embed_service;
  std::size_t dims = 0;
  std::size_t completed = 0;
};

void write_checkpoint(const fs::path& dir, const Checkpoint& cp) {
  io::write_file_atomic(dir / "checkpoint.json", json{{"fingerprint", cp.fingerprint},
                                                      {"embed_service", cp.embed_service},
                                                      {"dims", cp.dims},
                                                      {"completed", cp.completed}}
                                                     .dump() +
                                                     "\n");
}

}  // namespace

DenseIndex build_index(const corpus::Collection& collection, clients::Embedder& embedder, const fs::path& dir,
                       const BuildOptions& options) {
  if (collection.passages.empty()) throw PreconditionError("build_index: empty collection");
  if (options.batch_size == 0) throw PreconditionError("build_index: batch_size must be positive");
  const auto work = dir / "build";
  const auto fingerprint = collection_fingerprint(collection);
  const auto service = embedder.identity();

  std::vector<std::string> ids;
  std::vector<float> vectors;
  Checkpoint cp{fingerprint, service, 0, 0};

  if (options.resume && fs::exists(work / "checkpoint.json")) {
    auto saved = json::parse(io::read_file(work / "checkpoint.json"));
    if (saved.at("fingerprint") != fingerprint) {
      throw ConfigError("checkpoint in " + work.string() + " belongs to a different collection");
    }
    if (saved.at("embed_service") != service) {
      throw ConfigError("checkpoint in " + work.string() + " was built with " +
                        saved.at("embed_service").get<std::string>());
    }
    cp.dims = saved.at("dims");
    cp.completed = saved.at("completed");
    // Anything past the checkpoint is a torn write and is discarded.
    auto raw = io::read_file(work / "vectors.partial");
    if (raw.size() < cp.completed * cp.dims * sizeof(float)) throw CorruptionError("checkpoint vectors truncated");
    vectors.resize(cp.completed * cp.dims);
    std::memcpy(vectors.data(), raw.data(), vectors.size() * sizeof(float));
    for (std::size_t i = 0; i < cp.completed; ++i) ids.push_back(collection.passages[i].passage_id);
  } else {
    fs::remove_all(work);
  }
  fs::create_directories(work);
  io::write_file_atomic(work / "vectors.partial", as_bytes(vectors));
  write_checkpoint(work, cp);

  const auto& passages = collection.passages;
  const auto wave = std::max<std::size_t>(1, options.parallel_batches);
  std::size_t next = cp.completed;
  while (next < passages.size()) {
    std::vector<std::pair<std::size_t, std::size_t>> batches;
    for (std::size_t b = 0; b < wave && next < passages.size(); ++b) {
      auto end = std::min(passages.size(), next + options.batch_size);
      batches.emplace_back(next, end);
      next = end;
    }
    std::vector<std::future<std::vector<clients::EmbeddingVector>>> fetches;
    for (auto [begin, end] : batches) {
      fetches.push_back(std::async(wave > 1 ? std::launch::async : std::launch::deferred, [&, begin, end] {
        std::vector<std::string> texts;
        for (auto i = begin; i < end; ++i) texts.push_back(embed_text(passages[i]));
        return embedder.embed(texts);
      }));
    }
    std::string failure;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::vector<clients::EmbeddingVector> got;
      try {
        got = fetches[b].get();
      } catch (const ServiceError& e) {
        // Drain the remaining futures so no fetch outlives this frame.
        for (auto r = b + 1; r < batches.size(); ++r) {
          try {
            fetches[r].get();
          } catch (const Error&) {
          }
        }
        failure = e.what();
        break;
      }
      const auto [begin, end] = batches[b];
      if (got.size() != end - begin) throw ServiceError("embedder returned wrong batch size", false);
      std::vector<float> chunk;
      for (std::size_t i = 0; i < got.size(); ++i) {
        if (cp.dims == 0) cp.dims = got[i].dims();
        if (got[i].dims() != cp.dims) throw DimsMismatchError(cp.dims, got[i].dims());
        chunk.insert(chunk.end(), got[i].values.begin(), got[i].values.end());
        ids.push_back(passages[begin + i].passage_id);
      }
      vectors.insert(vectors.end(), chunk.begin(), chunk.end());
      io::append_file(work / "vectors.partial", as_bytes(chunk));
      cp.completed = end;
    }
    write_checkpoint(work, cp);
    if (!failure.empty()) throw BuildSuspended(cp.completed, failure);
  }

  IndexManifest m;
  m.collection_id = collection.collection_id;
  m.langs = collection.langs;
  m.dims = cp.dims;
  m.embed_service = service;
  DenseIndex idx(std::move(m), std::move(ids), std::move(vectors));
  idx.save(dir);
  fs::remove_all(work);
  return idx;
}

DenseIndex merge_indexes(std::span<const DenseIndex> parts) {
  if (parts.empty()) throw PreconditionError("merge_indexes: nothing to merge");
  IndexManifest m;
  m.dims = parts.front().dims();
  m.embed_service = parts.front().manifest().embed_service;
  std::vector<std::string> ids;
  std::vector<float> vectors;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& part = parts[i];
    if (part.dims() != m.dims) throw DimsMismatchError(m.dims, part.dims());
    if (part.manifest().embed_service != m.embed_service) {
      throw ConfigError("cannot merge indexes built by '" + m.embed_service + "' and '" +
                        part.manifest().embed_service + "'");
    }
    if (part.manifest().embed_text_policy != parts.front().manifest().embed_text_policy) {
      throw ConfigError("cannot merge indexes with different embed-text policies");
    }
    m.collection_id += (i ? "+" : "") + part.manifest().collection_id;
    m.langs.insert(part.manifest().langs.begin(), part.manifest().langs.end());
    for (std::size_t r = 0; r < part.size(); ++r) {
      if (!seen.insert(part.id(r)).second) {
        throw ConfigError("passage id collision while merging: '" + part.id(r) + "'");
      }
      ids.push_back(part.id(r));
      auto v = part.vector(r);
      vectors.insert(vectors.end(), v.begin(), v.end());
    }
  }
  m.embed_text_policy = parts.front().manifest().embed_text_policy;
  m.normalization = parts.front().manifest().normalization;
  return DenseIndex(std::move(m), std::move(ids), std::move(vectors));
}

}  // namespace mrag::index
