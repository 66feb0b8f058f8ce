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

#include "mrag/pipeline.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <set>
#include <thread>

#include "mrag/http_clients.hpp"
#include "mrag/io.hpp"
#include "mrag/mocks.hpp"

#ifndef MRAG_DEFAULT_DATA_DIR
#define MRAG_DEFAULT_DATA_DIR "data"
#endif

namespace mrag::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path default_data_dir() {
  if (const char* env = std::getenv("MRAG_DATA_DIR"); env && *env) return env;
  return MRAG_DEFAULT_DATA_DIR;
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

ServiceConfig parse_service(const json& obj, const fs::path& base, const std::string& name) {
  reject_unknown_keys(obj,
                      {"endpoint", "model", "timeout_ms", "max_in_flight", "attempts", "seed", "dims", "lexicon",
                       "failure_trigger"},
                      "services." + name);
  ServiceConfig c;
  c.endpoint = obj.value("endpoint", c.endpoint);
  c.model = obj.value("model", "");
  c.timeout = std::chrono::milliseconds(obj.value("timeout_ms", c.timeout.count()));
  c.max_in_flight = obj.value("max_in_flight", c.max_in_flight);
  c.attempts = obj.value("attempts", c.attempts);
  c.seed = obj.value("seed", c.seed);
  c.dims = obj.value("dims", c.dims);
  if (obj.contains("lexicon")) c.lexicon = resolve(base, obj.at("lexicon").get<std::string>());
  c.failure_trigger = obj.value("failure_trigger", "");
  if (c.max_in_flight == 0) throw ConfigError("services." + name + ".max_in_flight must be positive");
  if (c.attempts < 1) throw ConfigError("services." + name + ".attempts must be at least 1");
  return c;
}

bool is_mock(const ServiceConfig& c) { return c.endpoint == "mock" || c.endpoint == "mock:"; }

clients::ServicePolicy policy_of(const ServiceConfig& c) {
  clients::ServicePolicy p;
  p.max_in_flight = c.max_in_flight;
  p.attempts = c.attempts;
  p.timeout = c.timeout;
  return p;
}

std::shared_ptr<const http::JsonTransport> transport_of(const ServiceConfig& c) {
  std::optional<std::string> key;
  if (const char* env = std::getenv("MRAG_API_KEY"); env && *env) key = env;
  return std::make_shared<http::JsonTransport>(http::Endpoint::parse(c.endpoint), policy_of(c), key);
}

std::string http_identity(const ServiceConfig& c) { return c.model.empty() ? c.endpoint : c.model; }

ServiceConfig* service_by_name(ServicesConfig& s, std::string_view name) {
  if (name == "embed") return &s.embed;
  if (name == "rerank") return &s.rerank;
  if (name == "chat") return &s.chat;
  if (name == "translate") return &s.translate;
  if (name == "identify") return &s.identify;
  return nullptr;
}

json service_json(const ServiceConfig& c) {
  return json{{"endpoint", c.endpoint},
              {"model", c.model},
              {"seed", c.seed},
              {"dims", c.dims},
              {"lexicon", c.lexicon.string()},
              {"failure_trigger", c.failure_trigger}};
}

}  // namespace

ServicesConfig parse_services(const json& obj, const fs::path& base) {
  ServicesConfig s;
  if (obj.is_null()) return s;
  reject_unknown_keys(obj, {"embed", "rerank", "chat", "translate", "identify"}, "services");
  for (const char* name : {"embed", "rerank", "chat", "translate", "identify"}) {
    if (obj.contains(name)) *service_by_name(s, name) = parse_service(obj.at(name), base, name);
  }
  return s;
}

void apply_env_overrides(ServicesConfig& services) {
  const std::pair<const char*, const char*> vars[] = {{"MRAG_EMBED_ENDPOINT", "embed"},
                                                      {"MRAG_RERANK_ENDPOINT", "rerank"},
                                                      {"MRAG_CHAT_ENDPOINT", "chat"},
                                                      {"MRAG_TRANSLATE_ENDPOINT", "translate"},
                                                      {"MRAG_IDENTIFY_ENDPOINT", "identify"}};
  for (const auto& [var, name] : vars) {
    if (const char* v = std::getenv(var); v && *v) service_by_name(services, name)->endpoint = v;
  }
}

void apply_endpoint_override(ServicesConfig& services, std::string_view spec) {
  auto eq = spec.find('=');
  if (eq == std::string_view::npos) throw ConfigError("endpoint override must look like service=url");
  auto* target = service_by_name(services, spec.substr(0, eq));
  if (!target) throw ConfigError("unknown service '" + std::string(spec.substr(0, eq)) + "' in endpoint override");
  target->endpoint = std::string(spec.substr(eq + 1));
}

std::shared_ptr<clients::Embedder> make_embedder(const ServiceConfig& c) {
  if (is_mock(c)) return std::make_shared<mocks::MockEmbedder>(c.seed, c.dims);
  return std::make_shared<http::HttpEmbedder>(transport_of(c), http_identity(c));
}

ServiceSet make_services(const ServicesConfig& s) {
  ServiceSet set;
  set.embedder = make_embedder(s.embed);
  set.reranker = is_mock(s.rerank) ? std::shared_ptr<clients::Reranker>(std::make_shared<mocks::MockReranker>())
                                   : std::make_shared<http::HttpReranker>(transport_of(s.rerank), http_identity(s.rerank));
  set.generator = is_mock(s.chat)
                      ? std::shared_ptr<clients::Generator>(std::make_shared<mocks::MockGenerator>(s.chat.failure_trigger))
                      : std::make_shared<http::HttpGenerator>(transport_of(s.chat), http_identity(s.chat));
  if (is_mock(s.translate)) {
    set.translator = std::make_shared<mocks::MockTranslator>(
        s.translate.lexicon.empty() ? mocks::Lexicon{} : mocks::load_lexicon(s.translate.lexicon));
  } else {
    set.translator = std::make_shared<http::HttpTranslator>(transport_of(s.translate), http_identity(s.translate));
  }
  return set;
}

std::unique_ptr<langid::LanguageIdentifier> make_identifier(const ServiceConfig& c, const fs::path& data_dir) {
  if (is_mock(c) || c.endpoint == "builtin") {
    return std::make_unique<langid::BuiltinIdentifier>(langid::BuiltinIdentifier::from_directory(data_dir / "langid"));
  }
  return std::make_unique<langid::ExternalIdentifier>(transport_of(c));
}

void probe_endpoint(const ServiceConfig& c) {
  if (is_mock(c) || c.endpoint == "builtin") return;
  auto endpoint = http::Endpoint::parse(c.endpoint);
  httplib::Client client(endpoint.scheme_host_port);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(c.timeout).count() + 1, 0);
  if (!client.Get(endpoint.path_prefix.empty() ? "/" : endpoint.path_prefix)) {
    throw ConfigError("preflight: endpoint " + c.endpoint + " is unreachable");
  }
}

RunConfig parse_run_config(const json& run, const json& services, const fs::path& base) {
  reject_unknown_keys(run,
                      {"dataset", "dataset_tag", "user_languages", "retrieval_mode", "stores", "indexes",
                       "prompt_label", "prompt_catalog", "language_names", "top_k_retrieve", "top_k_context",
                       "query_translation", "output", "tag", "parallelism", "max_new_tokens"},
                      "run");
  RunConfig c;
  try {
    if (!run.contains("dataset")) throw ConfigError("run.dataset is required");
    c.dataset = resolve(base, run.at("dataset").get<std::string>());
    c.dataset_tag = run.value("dataset_tag", c.dataset.stem().string());
    const auto langs = run.value("user_languages", json::array());
    for (const auto& l : langs) c.user_languages.push_back(parse_language(l.get<std::string>()));
    c.mode = artifact::parse_mode(run.value("retrieval_mode", "none"));
    const auto stores = run.value("stores", json::object());
    for (const auto& [lang, path] : stores.items()) {
      c.stores[parse_language(lang)] = resolve(base, path.get<std::string>());
    }
    const auto indexes = run.value("indexes", json::object());
    for (const auto& [key, path] : indexes.items()) {
      c.indexes[key] = resolve(base, path.get<std::string>());
    }
    c.prompt_label = prompting::parse_label(run.value("prompt_label", "Reply short (EN)"));
    const auto data = default_data_dir();
    c.prompt_catalog = run.contains("prompt_catalog") ? resolve(base, run["prompt_catalog"]) : data / "prompts";
    c.language_names =
        run.contains("language_names") ? resolve(base, run["language_names"]) : data / "language_names.json";
    if (run.contains("top_k_retrieve")) c.top_k_retrieve = run["top_k_retrieve"].get<std::size_t>();
    if (run.contains("top_k_context")) c.top_k_context = run["top_k_context"].get<std::size_t>();
    if (run.contains("query_translation")) {
      const auto& qt = run["query_translation"];
      reject_unknown_keys(qt, {"enabled", "target"}, "run.query_translation");
      c.query_translation.enabled = qt.value("enabled", false);
      c.query_translation.target = parse_language(qt.value("target", "en"));
    }
    if (run.contains("output")) c.output = resolve(base, run["output"]);
    c.tag = run.value("tag", "");
    c.parallelism = run.value("parallelism", c.parallelism);
    c.max_new_tokens = run.value("max_new_tokens", c.max_new_tokens);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run config: ") + e.what());
  }
  c.services = parse_services(services, base);
  if (c.parallelism == 0) throw ConfigError("run.parallelism must be positive");
  if (c.max_new_tokens <= 0) throw ConfigError("run.max_new_tokens must be positive");
  if (c.mode == artifact::RetrievalMode::none && (c.top_k_retrieve || c.top_k_context)) {
    throw ConfigError("retrieval_mode none does not take top_k_retrieve/top_k_context");
  }
  if (c.top_k_retrieve && *c.top_k_retrieve == 0) throw ConfigError("top_k_retrieve must be at least 1");
  if (c.top_k_context && *c.top_k_context == 0) throw ConfigError("top_k_context must be at least 1");
  if (c.retrieve_k() < c.context_k()) throw ConfigError("top_k_context cannot exceed top_k_retrieve");
  return c;
}

json resolved_config(const RunConfig& c) {
  json langs = json::array();
  for (auto l : c.user_languages) langs.push_back(to_string(l));
  json stores = json::object();
  for (const auto& [l, p] : c.stores) stores[std::string(to_string(l))] = p.string();
  json indexes = json::object();
  for (const auto& [k, p] : c.indexes) indexes[k] = p.string();
  json services{{"embed", service_json(c.services.embed)},
                {"rerank", service_json(c.services.rerank)},
                {"chat", service_json(c.services.chat)},
                {"translate", service_json(c.services.translate)}};
  json out{{"dataset", c.dataset.string()},
           {"dataset_tag", c.dataset_tag},
           {"user_languages", langs},
           {"retrieval_mode", artifact::to_string(c.mode)},
           {"stores", stores},
           {"indexes", indexes},
           {"prompt_label", prompting::label_name(c.prompt_label)},
           {"prompt_catalog", c.prompt_catalog.string()},
           {"language_names", c.language_names.string()},
           {"query_translation",
            {{"enabled", c.query_translation.enabled}, {"target", to_string(c.query_translation.target)}}},
           {"services", services},
           {"tag", c.tag},
           {"max_new_tokens", c.max_new_tokens}};
  if (c.mode != artifact::RetrievalMode::none) {
    out["top_k_retrieve"] = c.retrieve_k();
    out["top_k_context"] = c.context_k();
  }
  return out;
}

std::string config_hash(const RunConfig& config) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", io::crc32(resolved_config(config).dump()));
  return std::string("crc32:") + buf;
}

std::string index_key(artifact::RetrievalMode mode, Lang ul) {
  using artifact::RetrievalMode;
  switch (mode) {
    case RetrievalMode::none: return "";
    case RetrievalMode::english: return "en";
    case RetrievalMode::user_lang: return std::string(to_string(ul));
    case RetrievalMode::english_user_lang: return ul == Lang::en ? "en" : "en+" + std::string(to_string(ul));
    case RetrievalMode::all_langs: return "all";
  }
  return "";
}

SearchQuery make_search_query(const corpus::QueryRecord& query, const QueryTranslation& qt,
                              clients::Translator* translator) {
  if (!qt.enabled) return {query.query_id, query.text};
  if (query.lang == qt.target) {
    throw PreconditionError("query translation target equals query language " + std::string(to_string(query.lang)));
  }
  if (!translator) throw ConfigError("query translation enabled without a translator");
  auto text = translator->translate(query.text, query.lang, qt.target);
  if (text.empty()) throw ServiceError("translator returned empty text", false);
  return {query.query_id, std::move(text)};
}

Retrieval retrieve_and_rerank(const SearchQuery& query, const index::DenseIndex& idx, const PassageLookup& passages,
                              clients::Embedder& embedder, clients::Reranker& reranker,
                              const RetrievalSettings& settings) {
  if (idx.size() == 0) throw PreconditionError("retrieval over an empty collection");
  Retrieval out;
  out.context.query_id = query.query_id;
  std::vector<std::string> texts{query.text};
  auto vectors = embedder.embed(texts);
  auto found = idx.search(vectors.at(0).values, settings.top_k_retrieve);
  out.candidates = std::move(found.ranked);

  std::vector<corpus::Passage> candidates;
  candidates.reserve(out.candidates.size());
  for (const auto& c : out.candidates) {
    auto it = passages.find(c.passage_id);
    if (it == passages.end()) throw ConfigError("index passage '" + c.passage_id + "' missing from the stores");
    candidates.push_back(it->second);
  }
  auto scores = reranker.rerank(query.text, candidates);
  if (scores.size() != candidates.size()) throw ServiceError("reranker count mismatch", false);
  clients::sort_by_relevance(scores);
  out.reranked = scores;
  for (std::size_t i = 0; i < scores.size() && i < settings.top_k_context; ++i) {
    out.context.passages.push_back(passages.at(scores[i].passage_id));
  }
  return out;
}

RunResources prepare(const RunConfig& config, ServiceSet& services) {
  RunResources res;
  auto all = corpus::load_queries(config.dataset, config.dataset_tag);
  std::vector<Lang> uls = config.user_languages;
  if (uls.empty()) {
    std::set<Lang> present;
    for (const auto& q : all) present.insert(q.lang);
    uls.assign(present.begin(), present.end());
  }
  for (auto& q : all) {
    if (std::find(uls.begin(), uls.end(), q.lang) != uls.end()) res.queries.push_back(std::move(q));
  }
  if (res.queries.empty()) throw ConfigError("dataset has no queries in the configured user languages");

  res.prompts = prompting::PromptCatalog::from_directory(config.prompt_catalog);
  res.names = prompting::LanguageNameCatalog::from_file(config.language_names);
  res.prompts.validate(config.prompt_label, uls, res.names);

  if (!services.generator) throw ConfigError("no generator configured");
  probe_endpoint(config.services.chat);

  if (config.query_translation.enabled) {
    if (config.mode == artifact::RetrievalMode::none) throw ConfigError("query translation needs a retrieval mode");
    if (!services.translator) throw ConfigError("query translation enabled without a translator");
    probe_endpoint(config.services.translate);
  }

  if (config.mode == artifact::RetrievalMode::none) return res;
  if (!services.embedder || !services.reranker) throw ConfigError("retrieval needs an embedder and a reranker");
  probe_endpoint(config.services.embed);
  probe_endpoint(config.services.rerank);

  for (const auto& [lang, path] : config.stores) {
    auto store = corpus::open_store(path);
    for (auto& p : store.passages) {
      auto id = p.passage_id;
      if (!res.passages.emplace(id, std::move(p)).second) {
        throw ConfigError("passage id '" + id + "' appears in more than one store");
      }
    }
  }

  std::vector<std::string> probe{"preflight"};
  const auto service = services.embedder->identity();
  std::size_t dims = 0;
  try {
    dims = services.embedder->embed(probe).at(0).dims();
  } catch (const ServiceError& e) {
    throw ConfigError(std::string("preflight: embedder probe failed: ") + e.what());
  }
  for (auto ul : uls) {
    auto key = index_key(config.mode, ul);
    if (res.indexes.count(key)) continue;
    auto it = config.indexes.find(key);
    if (it == config.indexes.end()) {
      throw ConfigError("retrieval mode " + std::string(artifact::to_string(config.mode)) + " needs index '" + key +
                        "' for " + std::string(to_string(ul)));
    }
    auto idx = index::DenseIndex::open(it->second);
    if (idx.manifest().embed_service != service) {
      throw ConfigError("index '" + key + "' was built with '" + idx.manifest().embed_service +
                        "' but the query-time embedder is '" + service + "'");
    }
    if (idx.dims() != dims) throw DimsMismatchError(idx.dims(), dims);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (!res.passages.count(idx.id(i))) {
        throw ConfigError("index '" + key + "' references passage '" + idx.id(i) + "' that no store provides");
      }
    }
    res.indexes.emplace(key, std::move(idx));
  }
  return res;
}

namespace {

std::vector<artifact::ContextEntry> entries_of(const std::vector<corpus::Passage>& passages,
                                               const std::vector<double>& scores) {
  std::vector<artifact::ContextEntry> out;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    const auto& p = passages[i];
    out.push_back({p.passage_id, p.title, p.text, p.lang, scores[i]});
  }
  return out;
}

template <typename F>
auto stage(const std::string& query_id, const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const QueryError&) {
    throw;
  } catch (const std::exception& e) {
    throw QueryError(query_id, name, e.what());
  }
}

}  // namespace

artifact::GenerationRecord process_query(const corpus::QueryRecord& query, const RunConfig& config,
                                         const RunResources& resources, ServiceSet& services) {
  artifact::GenerationRecord rec;
  rec.query_id = query.query_id;
  rec.dataset = query.dataset;
  rec.ul = query.lang;
  rec.question = query.text;
  rec.gold_answers = query.gold_answers;
  rec.unanswerable = query.unanswerable;

  auto sq = stage(query.query_id, "translate", [&] {
    return make_search_query(query, config.query_translation, services.translator.get());
  });
  rec.search_query = sq.text;
  if (config.query_translation.enabled) rec.services["translate"] = services.translator->identity();

  prompting::ContextSet context{query.query_id, {}};
  if (config.mode != artifact::RetrievalMode::none) {
    auto r = stage(query.query_id, "retrieve", [&] {
      const auto& idx = resources.indexes.at(index_key(config.mode, query.lang));
      return retrieve_and_rerank(sq, idx, resources.passages, *services.embedder, *services.reranker,
                                 {config.retrieve_k(), config.context_k()});
    });
    std::vector<double> rerank_scores;
    for (std::size_t i = 0; i < r.context.passages.size(); ++i) rerank_scores.push_back(r.reranked[i].score);
    rec.context = entries_of(r.context.passages, rerank_scores);
    std::vector<corpus::Passage> first;
    std::vector<double> first_scores;
    for (std::size_t i = 0; i < r.candidates.size() && i < config.context_k(); ++i) {
      first.push_back(resources.passages.at(r.candidates[i].passage_id));
      first_scores.push_back(r.candidates[i].score);
    }
    rec.first_stage = entries_of(first, first_scores);
    rec.services["embed"] = services.embedder->identity();
    rec.services["rerank"] = services.reranker->identity();
    context = std::move(r.context);
  }

  rec.system_prompt = stage(query.query_id, "prompt", [&] {
    return prompting::render_system_prompt(resources.prompts.spec(config.prompt_label), query.lang, resources.names);
  });
  auto request = prompting::build_chat(rec.system_prompt, prompting::format_context(context), query.text,
                                       config.max_new_tokens);
  rec.response = stage(query.query_id, "generate", [&] { return services.generator->generate(request); });
  rec.services["chat"] = services.generator->identity();
  return rec;
}

std::vector<std::string> replay_check(const artifact::RunArtifact& art, const RunConfig& config,
                                      const RunResources& resources, ServiceSet& services, std::size_t samples,
                                      std::size_t* checked) {
  std::vector<std::string> mismatches;
  std::size_t n = 0;
  const auto& records = art.records;
  if (records.empty() || samples == 0) {
    if (checked) *checked = 0;
    return mismatches;
  }
  const auto count = std::min(samples, records.size());
  for (std::size_t s = 0; s < count; ++s) {
    const auto& rec = records[s * records.size() / count];
    ++n;
    bool ok = rec.system_prompt ==
              prompting::render_system_prompt(resources.prompts.spec(config.prompt_label), rec.ul, resources.names);
    if (ok && config.mode != artifact::RetrievalMode::none) {
      const auto& idx = resources.indexes.at(index_key(config.mode, rec.ul));
      auto r = retrieve_and_rerank({rec.query_id, rec.search_query}, idx, resources.passages, *services.embedder,
                                   *services.reranker, {config.retrieve_k(), config.context_k()});
      ok = r.context.passages.size() == rec.context.size();
      for (std::size_t i = 0; ok && i < rec.context.size(); ++i) {
        ok = r.context.passages[i].passage_id == rec.context[i].passage_id;
      }
    }
    if (!ok) mismatches.push_back(rec.query_id);
  }
  if (checked) *checked = n;
  return mismatches;
}

RunOutcome run(const RunConfig& config, ServiceSet& services, const RunOptions& options) {
  if (config.output.empty()) throw ConfigError("run.output is required");
  auto resources = prepare(config, services);
  const auto hash = config_hash(config);
  const auto& dir = config.output;

  std::map<std::string, artifact::GenerationRecord> done;
  if (fs::exists(dir / "manifest.json")) {
    auto previous = artifact::read_manifest(dir);
    if (previous.config_hash != hash) {
      if (!options.force) {
        throw ConfigError(dir.string() + " holds a run with a different config; pass --force to replace it");
      }
      fs::remove_all(dir);
    }
  }
  fs::create_directories(dir);
  if (fs::exists(dir / "records.jsonl")) {
    for (const auto& line : io::split_lines(io::read_file(dir / "records.jsonl")).lines) {
      if (line.empty()) continue;
      auto rec = artifact::record_from_json(json::parse(line));
      done.emplace(rec.query_id, std::move(rec));
    }
  }
  for (auto& rec : artifact::read_journal(dir / "journal.jsonl")) done.emplace(rec.query_id, std::move(rec));

  artifact::RunManifest manifest;
  manifest.config_hash = hash;
  manifest.config = resolved_config(config);
  manifest.status = "running";
  manifest.total_queries = resources.queries.size();
  artifact::write_manifest(dir, manifest);

  // Rewrite the journal so a torn tail from a crash does not linger.
  {
    std::string journal;
    for (const auto& [id, rec] : done) journal += artifact::to_json(rec).dump() + "\n";
    io::write_file_atomic(dir / "journal.jsonl", journal);
    fs::remove(dir / "records.jsonl");
  }

  std::vector<const corpus::QueryRecord*> pending;
  for (const auto& q : resources.queries) {
    if (!done.count(q.query_id)) pending.push_back(&q);
  }
  std::sort(pending.begin(), pending.end(),
            [](const auto* a, const auto* b) { return a->query_id < b->query_id; });

  RunOutcome outcome;
  outcome.total = resources.queries.size();
  outcome.resumed = done.size();

  std::mutex writer;
  std::vector<artifact::ErrorEntry> errors;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> written{0};
  std::atomic<bool> stopped{false};

  auto worker = [&] {
    while (true) {
      if (options.stop_after && written.load() >= *options.stop_after) {
        stopped = true;
        return;
      }
      auto i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const auto& q = *pending[i];
      auto start = std::chrono::steady_clock::now();
      try {
        auto rec = process_query(q, config, resources, services);
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
        std::lock_guard lock(writer);
        io::append_file(dir / "journal.jsonl", artifact::to_json(rec).dump() + "\n");
        io::append_file(dir / "timings.jsonl", json{{"query_id", q.query_id}, {"ms", ms.count()}}.dump() + "\n");
        done.emplace(rec.query_id, std::move(rec));
        ++written;
      } catch (const QueryError& e) {
        std::lock_guard lock(writer);
        errors.push_back({q.query_id, q.dataset, q.lang, e.stage(), e.cause()});
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto threads = std::min<std::size_t>(config.parallelism, std::max<std::size_t>(1, pending.size()));
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  outcome.completed = done.size();
  outcome.errors = errors.size();
  if (stopped && next.load() < pending.size()) {
    outcome.interrupted = true;
    return outcome;
  }

  std::sort(errors.begin(), errors.end(), [](const auto& a, const auto& b) { return a.query_id < b.query_id; });
  std::string records;
  for (const auto& [id, rec] : done) records += artifact::to_json(rec).dump() + "\n";
  std::string ledger;
  for (const auto& e : errors) ledger += artifact::to_json(e).dump() + "\n";
  io::write_file_atomic(dir / "records.jsonl", records);
  io::write_file_atomic(dir / "errors.jsonl", ledger);
  fs::remove(dir / "journal.jsonl");

  manifest.status = errors.empty() ? "complete" : "partial";
  manifest.records = done.size();
  manifest.errors = errors.size();
  artifact::write_manifest(dir, manifest);

  if (options.replay_samples) {
    auto art = artifact::read_artifact(dir);
    outcome.replay_mismatches =
        replay_check(art, config, resources, services, options.replay_samples, &outcome.replay_checked);
  }
  return outcome;
}

}  // namespace mrag::pipeline
