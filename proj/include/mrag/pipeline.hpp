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

#include <chrono>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mrag/artifact.hpp"
#include "mrag/clients.hpp"
#include "mrag/corpus.hpp"
#include "mrag/index.hpp"
#include "mrag/langid.hpp"
#include "mrag/prompting.hpp"

namespace mrag::pipeline {

// Directory holding prompts/, language_names.json and langid/. Taken from
// MRAG_DATA_DIR when set, else the source tree the binary was built from.
std::filesystem::path default_data_dir();

// One model service. `endpoint` is "mock" for the in-process deterministic
// mock or an http:// URL speaking the wire contract.
struct ServiceConfig {
  std::string endpoint = "mock";
  // Identity recorded in manifests; defaults to the mock identity or the URL.
  std::string model;
  std::chrono::milliseconds timeout{60000};
  std::size_t max_in_flight = 8;
  int attempts = 3;
  // Mock-only knobs.
  uint64_t seed = 0;
  std::size_t dims = 64;
  std::filesystem::path lexicon;
  std::string failure_trigger;
};

struct ServicesConfig {
  ServiceConfig embed;
  ServiceConfig rerank;
  ServiceConfig chat;
  ServiceConfig translate;
  ServiceConfig identify;
};

// Parses the "services" section; relative paths resolve against `base`.
ServicesConfig parse_services(const nlohmann::json& obj, const std::filesystem::path& base);

// Environment overrides: MRAG_{EMBED,RERANK,CHAT,TRANSLATE,IDENTIFY}_ENDPOINT.
void apply_env_overrides(ServicesConfig& services);
// "service=url" as given to --endpoint-override.
void apply_endpoint_override(ServicesConfig& services, std::string_view spec);

struct ServiceSet {
  std::shared_ptr<clients::Embedder> embedder;
  std::shared_ptr<clients::Reranker> reranker;
  std::shared_ptr<clients::Generator> generator;
  std::shared_ptr<clients::Translator> translator;
};

// Bearer token for HTTP services comes from MRAG_API_KEY.
ServiceSet make_services(const ServicesConfig& services);
std::shared_ptr<clients::Embedder> make_embedder(const ServiceConfig& config);
std::unique_ptr<langid::LanguageIdentifier> make_identifier(const ServiceConfig& config,
                                                            const std::filesystem::path& data_dir);

// Throws ConfigError when an http endpoint does not answer at all.
void probe_endpoint(const ServiceConfig& config);

struct QueryTranslation {
  bool enabled = false;
  Lang target = Lang::en;
};

struct RunConfig {
  std::filesystem::path dataset;
  std::string dataset_tag;
  // Empty means every language present in the dataset.
  std::vector<Lang> user_languages;
  artifact::RetrievalMode mode = artifact::RetrievalMode::none;
  std::map<Lang, std::filesystem::path> stores;
  // Keyed "en", "fr", ..., "en+fr", "all".
  std::map<std::string, std::filesystem::path> indexes;
  prompting::PromptLabel prompt_label = prompting::PromptLabel::reply_short_en;
  std::filesystem::path prompt_catalog;
  std::filesystem::path language_names;
  std::optional<std::size_t> top_k_retrieve;
  std::optional<std::size_t> top_k_context;
  QueryTranslation query_translation;
  ServicesConfig services;
  std::filesystem::path output;
  std::string tag;
  std::size_t parallelism = 8;
  int max_new_tokens = clients::kDefaultMaxNewTokens;

  std::size_t retrieve_k() const { return top_k_retrieve.value_or(index::kDefaultTopK); }
  std::size_t context_k() const { return top_k_context.value_or(5); }
};

// Parses the "run" section (plus the shared "services" section) of a config
// file. Relative paths resolve against `base`.
RunConfig parse_run_config(const nlohmann::json& run, const nlohmann::json& services,
                           const std::filesystem::path& base);

// Canonical JSON of every field that affects results (the output path is
// excluded so identical runs into different directories agree).
nlohmann::json resolved_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);

// Index key used for a query language under a retrieval mode.
std::string index_key(artifact::RetrievalMode mode, Lang ul);

struct SearchQuery {
  std::string query_id;
  std::string text;
};

// Identity copy, or translation into the configured target language.
SearchQuery make_search_query(const corpus::QueryRecord& query, const QueryTranslation& qt,
                              clients::Translator* translator);

using PassageLookup = std::unordered_map<std::string, corpus::Passage>;

struct Retrieval {
  prompting::ContextSet context;
  // First-stage candidates, best first (all K of them).
  std::vector<index::Candidate> candidates;
  std::vector<clients::RerankScore> reranked;
};

struct RetrievalSettings {
  std::size_t top_k_retrieve = index::kDefaultTopK;
  std::size_t top_k_context = 5;
};

// Dense top-K, rerank, keep top-k in reranker order.
Retrieval retrieve_and_rerank(const SearchQuery& query, const index::DenseIndex& idx, const PassageLookup& passages,
                              clients::Embedder& embedder, clients::Reranker& reranker,
                              const RetrievalSettings& settings);

// Everything a run needs, loaded and validated before any side effect.
struct RunResources {
  std::vector<corpus::QueryRecord> queries;
  prompting::PromptCatalog prompts;
  prompting::LanguageNameCatalog names;
  std::map<std::string, index::DenseIndex> indexes;
  PassageLookup passages;
};

// Throws ConfigError (or the underlying I/O / service error) when the config
// cannot run: bad prompt coverage, missing indexes, service mismatch,
// unreachable endpoints.
RunResources prepare(const RunConfig& config, ServiceSet& services);

// A per-query failure tagged with the stage that raised it.
class QueryError : public Error {
 public:
  QueryError(std::string query_id, std::string stage, const std::string& cause)
      : Error("query " + query_id + " failed at " + stage + ": " + cause),
        query_id_(std::move(query_id)),
        stage_(std::move(stage)),
        cause_(cause) {}

  const std::string& query_id() const { return query_id_; }
  const std::string& stage() const { return stage_; }
  const std::string& cause() const { return cause_; }

 private:
  std::string query_id_;
  std::string stage_;
  std::string cause_;
};

// One query end to end. Throws QueryError naming the failing stage.
artifact::GenerationRecord process_query(const corpus::QueryRecord& query, const RunConfig& config,
                                         const RunResources& resources, ServiceSet& services);

struct RunOptions {
  // Discard an artifact produced by a different config instead of failing.
  bool force = false;
  // Stop claiming new queries after this many records (simulates a crash).
  std::optional<std::size_t> stop_after;
  // Records re-derived after the run to cross-check composition.
  std::size_t replay_samples = 10;
};

struct RunOutcome {
  std::size_t total = 0;
  std::size_t completed = 0;
  std::size_t resumed = 0;
  std::size_t errors = 0;
  bool interrupted = false;
  std::size_t replay_checked = 0;
  std::vector<std::string> replay_mismatches;
};

RunOutcome run(const RunConfig& config, ServiceSet& services, const RunOptions& options = {});

// Re-derives context ids and system prompts for up to `samples` evenly
// spaced records and reports query ids that disagree.
std::vector<std::string> replay_check(const artifact::RunArtifact& art, const RunConfig& config,
                                      const RunResources& resources, ServiceSet& services, std::size_t samples,
                                      std::size_t* checked = nullptr);

}  // namespace mrag::pipeline
