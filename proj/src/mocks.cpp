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

#include "mrag/mocks.hpp"

#include <cmath>
#include <regex>
#include <set>

#include "mrag/io.hpp"
#include "mrag/text.hpp"

namespace mrag::mocks {

using text::lexical_tokens;

uint64_t stable_hash(std::string_view bytes, uint64_t seed) {
  // FNV-1a, 64 bit, with the seed folded into the offset basis.
  uint64_t h = 1469598103934665603ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

clients::EmbeddingVector MockEmbedder::embed_one(std::string_view input) const {
  std::vector<double> acc(dims_, 0.0);
  auto padded = text::to_code_points(" " + text::join(lexical_tokens(input), " ") + " ");
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    auto gram = text::to_utf8(std::u32string_view(padded).substr(i, 3));
    auto h = stable_hash(gram, seed_);
    acc[h % dims_] += ((h >> 32) & 1) ? -1.0 : 1.0;
  }
  double norm = 0.0;
  for (double x : acc) norm += x * x;
  norm = std::sqrt(norm);
  clients::EmbeddingVector v;
  v.values.resize(dims_);
  for (std::size_t i = 0; i < dims_; ++i) v.values[i] = norm > 0 ? static_cast<float>(acc[i] / norm) : 0.0f;
  return v;
}

std::vector<clients::EmbeddingVector> MockEmbedder::embed(std::span<const std::string> texts) {
  clients::check_embed_batch(texts);
  ++calls_;
  std::vector<clients::EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

std::string MockEmbedder::identity() const {
  return "mock-embedder:hash3:dims=" + std::to_string(dims_) + ":seed=" + std::to_string(seed_);
}

double MockReranker::score(std::string_view query, std::string_view passage_text) {
  auto q = lexical_tokens(query);
  std::set<std::string> query_tokens(q.begin(), q.end());
  if (query_tokens.empty()) return 0.0;
  auto p = lexical_tokens(passage_text);
  std::set<std::string> passage_tokens(p.begin(), p.end());
  std::size_t hits = 0;
  for (const auto& t : query_tokens) hits += passage_tokens.count(t);
  return static_cast<double>(hits) / static_cast<double>(query_tokens.size());
}

std::vector<clients::RerankScore> MockReranker::rerank(std::string_view query,
                                                       std::span<const corpus::Passage> candidates) {
  clients::check_rerank_batch(candidates);
  ++calls_;
  std::vector<clients::RerankScore> out;
  out.reserve(candidates.size());
  for (const auto& p : candidates) out.push_back({p.passage_id, score(query, corpus::joined_text(p))});
  return out;
}

namespace {

std::vector<std::string> split_sentences(const std::string& line) {
  std::vector<std::string> out;
  std::u32string current;
  for (char32_t c : text::to_code_points(line)) {
    current.push_back(c);
    if (c == U'.' || c == U'!' || c == U'?' || c == U'。' || c == U'！' || c == U'？') {
      auto s = text::collapse_whitespace(text::to_utf8(current));
      if (!s.empty()) out.push_back(s);
      current.clear();
    }
  }
  auto s = text::collapse_whitespace(text::to_utf8(current));
  if (!s.empty()) out.push_back(s);
  return out;
}

std::string truncate_tokens(const std::string& s, int max_tokens) {
  auto tokens = text::split_whitespace(s);
  if (tokens.size() <= static_cast<std::size_t>(max_tokens)) return s;
  tokens.resize(static_cast<std::size_t>(max_tokens));
  return text::join(tokens, " ");
}

}  // namespace

std::string MockGenerator::generate(const clients::ChatRequest& request) {
  clients::validate(request);
  ++calls_;
  const auto& user = request.messages.back().content;
  if (!failure_trigger_.empty() && user.find(failure_trigger_) != std::string::npos) {
    throw ServiceError("mock generator: injected failure", false);
  }

  auto lines = io::split_lines(user).lines;
  while (!lines.empty() && text::collapse_whitespace(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) return kNoAnswer;
  const auto question = lines.back();
  lines.pop_back();

  static const std::regex header(R"(^Document \d+: )");
  std::vector<std::string> sentences;
  for (const auto& line : lines) {
    if (std::regex_search(line, header)) continue;
    for (auto& s : split_sentences(line)) sentences.push_back(std::move(s));
  }
  if (sentences.empty()) return kNoAnswer;

  auto q = lexical_tokens(question);
  std::set<std::string> question_tokens(q.begin(), q.end());
  std::size_t best = 0;
  std::size_t best_overlap = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto t = lexical_tokens(sentences[i]);
    std::set<std::string> tokens(t.begin(), t.end());
    std::size_t overlap = 0;
    for (const auto& tok : question_tokens) overlap += tokens.count(tok);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = i;
    }
  }
  return truncate_tokens(sentences[best], request.max_new_tokens);
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  Lexicon lexicon;
  auto lines = io::split_lines(io::read_file(path)).lines;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 4) throw SchemaError(path.string(), i + 1, "expected 4 tab-separated columns");
    auto src = try_parse_language(cols[0]);
    auto tgt = try_parse_language(cols[1]);
    if (!src || !tgt) throw SchemaError(path.string(), i + 1, "unknown language code");
    lexicon[{*src, *tgt}][text::lowercase(cols[2])] = cols[3];
  }
  return lexicon;
}

std::string MockTranslator::translate(std::string_view input, Lang source, Lang target) {
  clients::check_translate_pair(source, target);
  auto pair = lexicon_.find({source, target});
  if (pair == lexicon_.end()) {
    throw ServiceError("mock translator: unsupported pair " + std::string(to_string(source)) + "->" +
                           std::string(to_string(target)),
                       false);
  }
  ++calls_;
  std::vector<std::string> out;
  for (const auto& token : text::split_whitespace(input)) {
    auto cps = text::to_code_points(token);
    std::size_t lo = 0;
    std::size_t hi = cps.size();
    while (lo < hi && text::is_punctuation(cps[lo])) ++lo;
    while (hi > lo && text::is_punctuation(cps[hi - 1])) --hi;
    auto core = text::to_utf8(std::u32string_view(cps).substr(lo, hi - lo));
    auto it = pair->second.find(text::lowercase(core));
    if (core.empty() || it == pair->second.end()) {
      out.push_back(token);
      continue;
    }
    out.push_back(text::to_utf8(std::u32string_view(cps).substr(0, lo)) + it->second +
                  text::to_utf8(std::u32string_view(cps).substr(hi)));
  }
  return text::join(out, " ");
}

}  // namespace mrag::mocks
