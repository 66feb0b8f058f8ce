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

#include "mrag/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <json.hpp>
#include <map>
#include <set>

#include "mrag/corpus.hpp"
#include "mrag/error.hpp"
#include "mrag/evaluation.hpp"
#include "mrag/index.hpp"
#include "mrag/io.hpp"
#include "mrag/mock_server.hpp"
#include "mrag/pipeline.hpp"

namespace mrag::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::vector<std::string> endpoint_overrides;
  std::size_t parallelism = 0;
  bool force = false;
};

struct ConfigFile {
  json doc = json::object();
  fs::path base;

  json section(const char* name) const { return doc.contains(name) ? doc.at(name) : json::object(); }
};

ConfigFile load_config(const Globals& g) {
  ConfigFile c;
  if (g.config.empty()) return c;
  fs::path path(g.config);
  if (!fs::exists(path)) throw ConfigError("config file " + path.string() + " does not exist");
  try {
    c.doc = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!c.doc.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : c.doc.items()) {
    static const std::set<std::string> known{"services", "ingest", "index", "run", "eval", "report"};
    if (!known.count(key)) throw ConfigError("unknown config section '" + key + "'");
  }
  c.base = path.parent_path();
  return c;
}

pipeline::ServicesConfig services_of(const ConfigFile& c, const Globals& g) {
  auto s = pipeline::parse_services(c.doc.contains("services") ? c.doc["services"] : json(), c.base);
  pipeline::apply_env_overrides(s);
  for (const auto& o : g.endpoint_overrides) pipeline::apply_endpoint_override(s, o);
  return s;
}

// Flag value if given, else the config value resolved against the config dir.
std::string pick_path(const std::string& flag, const json& section, const char* key, const ConfigFile& c) {
  if (!flag.empty()) return flag;
  if (section.contains(key)) {
    fs::path p(section[key].get<std::string>());
    return (p.is_absolute() || c.base.empty() ? p : c.base / p).string();
  }
  return "";
}

std::vector<std::string> pick_paths(const std::vector<std::string>& flag, const json& section, const char* key,
                                    const ConfigFile& c) {
  if (!flag.empty()) return flag;
  std::vector<std::string> out;
  if (!section.contains(key)) return out;
  const auto& v = section[key];
  for (const auto& item : v.is_array() ? v : json::array({v})) {
    fs::path p(item.get<std::string>());
    out.push_back((p.is_absolute() || c.base.empty() ? p : c.base / p).string());
  }
  return out;
}

void require(const std::string& value, const char* what) {
  if (value.empty()) throw ConfigError(std::string("missing ") + what);
}

int cmd_ingest(const Globals& g, const std::vector<std::string>& inputs_flag, const std::string& store_flag,
               const std::string& id_flag, std::ostream& out) {
  auto cfg = load_config(g);
  auto section = cfg.section("ingest");
  auto inputs = pick_paths(inputs_flag, section, "input", cfg);
  auto store = pick_path(store_flag, section, "store", cfg);
  if (inputs.empty()) throw ConfigError("missing --input");
  require(store, "--store");
  if (fs::exists(fs::path(store) / "manifest.json") && !g.force) {
    throw ConfigError("store " + store + " already exists; pass --force to replace it");
  }
  std::string id = id_flag.empty() ? section.value("collection_id", fs::path(store).filename().string()) : id_flag;

  std::vector<corpus::Document> docs;
  for (const auto& input : inputs) {
    auto part = corpus::load_documents(input);
    docs.insert(docs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  auto collection = corpus::build_collection(id, docs);
  if (fs::exists(store)) fs::remove_all(store);
  corpus::persist_store(collection, store);

  std::map<Lang, std::size_t> per_lang;
  for (const auto& p : collection.passages) ++per_lang[p.lang];
  std::string counts;
  for (const auto& [lang, n] : per_lang) counts += fmt::format("{}{}={}", counts.empty() ? "" : " ", to_string(lang), n);
  out << fmt::format("ingested {} documents into {} passages ({}) -> {}\n", docs.size(), collection.passages.size(),
                     counts, store);
  return kSuccess;
}

corpus::Collection open_stores(const std::vector<std::string>& stores) {
  if (stores.size() == 1) return corpus::open_store(stores[0]);
  std::vector<corpus::Collection> parts;
  std::string id;
  for (const auto& s : stores) {
    parts.push_back(corpus::open_store(s));
    id += (id.empty() ? "" : "+") + parts.back().collection_id;
  }
  return corpus::merge_collections(id, parts);
}

int cmd_index_build(const Globals& g, const std::vector<std::string>& stores_flag, const std::string& out_flag,
                    std::size_t batch_size, bool resume, std::ostream& out) {
  auto cfg = load_config(g);
  auto section = cfg.section("index");
  auto stores = pick_paths(stores_flag, section, "stores", cfg);
  auto dir = pick_path(out_flag, section, "out", cfg);
  if (stores.empty()) throw ConfigError("missing --store");
  require(dir, "--out");
  if (fs::exists(fs::path(dir) / "manifest.json") && !g.force) {
    throw ConfigError("index " + dir + " already exists; pass --force to rebuild it");
  }
  auto collection = open_stores(stores);
  auto services = services_of(cfg, g);
  pipeline::probe_endpoint(services.embed);
  auto embedder = pipeline::make_embedder(services.embed);

  index::BuildOptions options;
  options.batch_size = batch_size ? batch_size : section.value("batch_size", options.batch_size);
  options.parallel_batches = g.parallelism ? g.parallelism : section.value("parallel_batches", options.parallel_batches);
  options.resume = resume;
  if (options.batch_size == 0) throw ConfigError("batch size must be positive");
  if (fs::exists(fs::path(dir) / "manifest.json")) fs::remove(fs::path(dir) / "manifest.json");

  auto idx = index::build_index(collection, *embedder, dir, options);
  out << io::read_file(fs::path(dir) / "manifest.json");
  out << fmt::format("indexed {} passages ({} dims) -> {}\n", idx.size(), idx.dims(), dir);
  return kSuccess;
}

int cmd_index_merge(const Globals& g, const std::vector<std::string>& inputs, const std::string& dir,
                    std::ostream& out) {
  if (inputs.size() < 2) throw ConfigError("merge needs at least two --input indexes");
  require(dir, "--out");
  if (fs::exists(fs::path(dir) / "manifest.json") && !g.force) {
    throw ConfigError("index " + dir + " already exists; pass --force to replace it");
  }
  std::vector<index::DenseIndex> parts;
  for (const auto& in : inputs) parts.push_back(index::DenseIndex::open(in));
  auto merged = index::merge_indexes(parts);
  merged.save(dir);
  out << io::read_file(fs::path(dir) / "manifest.json");
  out << fmt::format("merged {} indexes into {} vectors -> {}\n", parts.size(), merged.size(), dir);
  return kSuccess;
}

int cmd_index_search(const Globals& g, const std::string& dir, const std::string& query, std::size_t k,
                     std::ostream& out) {
  require(dir, "--index");
  require(query, "--query");
  auto cfg = load_config(g);
  auto idx = index::DenseIndex::open(dir);
  auto embedder = pipeline::make_embedder(services_of(cfg, g).embed);
  if (embedder->identity() != idx.manifest().embed_service) {
    throw ConfigError("index was built with '" + idx.manifest().embed_service + "' but the embedder is '" +
                      embedder->identity() + "'");
  }
  std::vector<std::string> texts{query};
  auto vec = embedder->embed(texts).at(0);
  auto found = idx.search(vec.values, k);
  std::size_t rank = 1;
  for (const auto& c : found.ranked) {
    out << json{{"rank", rank++}, {"id", c.passage_id}, {"score", c.score}}.dump() << "\n";
  }
  return kSuccess;
}

int cmd_run(const Globals& g, const std::string& output, const std::string& tag, std::size_t stop_after,
            std::ostream& out) {
  auto cfg = load_config(g);
  if (!cfg.doc.contains("run")) throw ConfigError("config has no 'run' section");
  auto services_doc = cfg.doc.contains("services") ? cfg.doc["services"] : json();
  auto config = pipeline::parse_run_config(cfg.doc["run"], services_doc, cfg.base);
  config.services = services_of(cfg, g);
  if (!output.empty()) config.output = output;
  if (!tag.empty()) config.tag = tag;
  if (g.parallelism) config.parallelism = g.parallelism;
  require(config.output.string(), "run output directory (run.output or --output)");

  auto services = pipeline::make_services(config.services);
  pipeline::RunOptions options;
  options.force = g.force;
  if (stop_after) options.stop_after = stop_after;
  auto outcome = pipeline::run(config, services, options);

  if (outcome.interrupted) {
    out << fmt::format("run stopped after {} of {} queries; rerun to resume -> {}\n", outcome.completed,
                       outcome.total, config.output.string());
    return kPartial;
  }
  out << fmt::format("run {}: {} records, {} errors ({} resumed) -> {}\n", outcome.errors ? "partial" : "complete",
                     outcome.completed, outcome.errors, outcome.resumed, config.output.string());
  if (!outcome.replay_mismatches.empty()) {
    out << fmt::format("replay check: {} of {} sampled records differ\n", outcome.replay_mismatches.size(),
                       outcome.replay_checked);
  }
  return outcome.errors ? kPartial : kSuccess;
}

int cmd_eval(const Globals& g, const std::string& run_flag, const std::string& out_flag, const std::string& langid,
             std::ostream& out) {
  auto cfg = load_config(g);
  auto section = cfg.section("eval");
  auto run_dir = pick_path(run_flag, section, "run", cfg);
  auto dir = pick_path(out_flag, section, "out", cfg);
  require(run_dir, "--run");
  require(dir, "--out");
  auto method = langid.empty() ? section.value("langid", "builtin") : langid;
  auto services = services_of(cfg, g);
  if (method == "builtin") {
    services.identify.endpoint = "builtin";
  } else if (method == "external") {
    if (services.identify.endpoint == "mock") throw ConfigError("external langid needs services.identify.endpoint");
    pipeline::probe_endpoint(services.identify);
  } else {
    throw ConfigError("unknown langid method '" + method + "' (expected builtin or external)");
  }
  auto identifier = pipeline::make_identifier(services.identify, pipeline::default_data_dir());
  auto art = artifact::read_artifact(run_dir);
  auto report = evaluation::aggregate(art, *identifier);
  evaluation::write_report(report, dir);
  out << evaluation::render_table(report.summary, evaluation::TableMetric::char3_recall);
  out << fmt::format("evaluated {} of {} queries ({} errors{}) -> {}\n", report.generated, report.total_queries,
                     report.errors, report.partial ? ", partial run" : "", dir);
  return report.partial || report.errors ? kPartial : kSuccess;
}

int cmd_report(const Globals& g, const std::vector<std::string>& evals_flag, const std::string& metric_flag,
               const std::string& out_flag, std::ostream& out) {
  auto cfg = load_config(g);
  auto section = cfg.section("report");
  auto evals = pick_paths(evals_flag, section, "evals", cfg);
  auto metric = evaluation::parse_table_metric(metric_flag.empty() ? section.value("metric", "char3") : metric_flag);
  auto dest = pick_path(out_flag, section, "out", cfg);
  if (evals.empty()) throw ConfigError("missing --eval");

  std::vector<evaluation::ReportRow> rows;
  for (const auto& e : evals) {
    json summary;
    try {
      summary = json::parse(io::read_file(fs::path(e) / "summary.json"));
      for (const auto& r : summary.at("rows")) rows.push_back(evaluation::report_row_from_json(r));
    } catch (const json::exception& ex) {
      throw CorruptionError(e + "/summary.json: " + ex.what());
    }
  }
  auto table = evaluation::render_table(rows, metric);
  if (!dest.empty()) {
    io::write_file_atomic(dest, table);
    json machine = json::array();
    for (const auto& r : rows) machine.push_back(evaluation::to_json(r));
    io::write_file_atomic(dest + ".json", machine.dump(2) + "\n");
  }
  out << table;
  return kSuccess;
}

int cmd_serve_mocks(const std::string& host, int port, const std::string& lexicon, const std::string& trigger,
                    uint64_t seed, std::size_t dims, std::ostream& out) {
  server::MockServerOptions options;
  options.embed_seed = seed;
  options.embed_dims = dims;
  if (!lexicon.empty()) options.lexicon = mocks::load_lexicon(lexicon);
  options.failure_trigger = trigger;
  options.langid_profiles = pipeline::default_data_dir() / "langid";
  server::MockServer server(options);
  out << fmt::format("serving mock services on http://{}:{}\n", host, port) << std::flush;
  server.listen(host, port);
  return kSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilingual retrieval-augmented generation harness", "mrag"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file with services/ingest/index/run/eval/report sections");
  app.add_option("--endpoint-override", g.endpoint_overrides, "service=url, e.g. chat=http://localhost:8000");
  app.add_option("--parallelism", g.parallelism, "Concurrent queries (run) or batches (index build)");
  app.add_flag("--force", g.force, "Replace existing outputs");

  std::function<int()> action;

  auto* ingest = app.add_subcommand("ingest", "Chunk a document corpus into a passage store");
  std::vector<std::string> ingest_inputs;
  std::string ingest_store, ingest_id;
  ingest->add_option("--input", ingest_inputs, "Documents JSONL (repeatable)");
  ingest->add_option("--store", ingest_store, "Output store directory");
  ingest->add_option("--collection-id", ingest_id, "Collection id (default: store directory name)");
  ingest->callback([&] { action = [&] { return cmd_ingest(g, ingest_inputs, ingest_store, ingest_id, out); }; });

  auto* index_cmd = app.add_subcommand("index", "Dense index commands");
  index_cmd->require_subcommand(1);
  auto* build = index_cmd->add_subcommand("build", "Embed a store into a dense index");
  std::vector<std::string> build_stores;
  std::string build_out;
  std::size_t batch_size = 0;
  bool resume = false;
  build->add_option("--store", build_stores, "Passage store (repeatable; stores are unioned)");
  build->add_option("--out", build_out, "Index directory");
  build->add_option("--batch-size", batch_size, "Passages per embedding request (default 32)");
  build->add_flag("--resume", resume, "Continue an interrupted build from its checkpoint");
  build->callback([&] { action = [&] { return cmd_index_build(g, build_stores, build_out, batch_size, resume, out); }; });

  auto* merge = index_cmd->add_subcommand("merge", "Union indexes built with the same embedder");
  std::vector<std::string> merge_inputs;
  std::string merge_out;
  merge->add_option("--input", merge_inputs, "Index directory (repeatable)")->required();
  merge->add_option("--out", merge_out, "Merged index directory")->required();
  merge->callback([&] { action = [&] { return cmd_index_merge(g, merge_inputs, merge_out, out); }; });

  auto* search = index_cmd->add_subcommand("search", "Exact top-k search for one query");
  std::string search_index, search_query;
  std::size_t search_k = 10;
  search->add_option("--index", search_index, "Index directory")->required();
  search->add_option("--query", search_query, "Query text")->required();
  search->add_option("--k", search_k, "Number of results")->capture_default_str();
  search->callback([&] { action = [&] { return cmd_index_search(g, search_index, search_query, search_k, out); }; });

  auto* run_cmd = app.add_subcommand("run", "Generate answers for a query set (resumable)");
  std::string run_output, run_tag;
  std::size_t stop_after = 0;
  run_cmd->add_option("--output", run_output, "Run directory (overrides run.output)");
  run_cmd->add_option("--tag", run_tag, "Run tag recorded in the manifest");
  run_cmd->add_option("--stop-after", stop_after, "Stop after N new records, leaving the run resumable");
  run_cmd->callback([&] { action = [&] { return cmd_run(g, run_output, run_tag, stop_after, out); }; });

  auto* eval = app.add_subcommand("eval", "Score a run artifact");
  std::string eval_run, eval_out, eval_langid;
  eval->add_option("--run", eval_run, "Run directory");
  eval->add_option("--out", eval_out, "Evaluation output directory");
  eval->add_option("--langid", eval_langid, "builtin (default) or external");
  eval->callback([&] { action = [&] { return cmd_eval(g, eval_run, eval_out, eval_langid, out); }; });

  auto* report = app.add_subcommand("report", "Render a language x retrieval-mode table from evaluations");
  std::vector<std::string> report_evals;
  std::string report_metric, report_out;
  report->add_option("--eval", report_evals, "Evaluation directory (repeatable)");
  report->add_option("--metric", report_metric, "char3 (default), clr, or recall");
  report->add_option("--out", report_out, "Write the table here and JSON rows to <out>.json");
  report->callback([&] { action = [&] { return cmd_report(g, report_evals, report_metric, report_out, out); }; });

  auto* serve = app.add_subcommand("serve-mocks", "Serve the mock services over HTTP");
  std::string serve_host = "127.0.0.1", serve_lexicon, serve_trigger;
  int serve_port = 8080;
  uint64_t serve_seed = 0;
  std::size_t serve_dims = mocks::MockEmbedder::kDefaultDims;
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port)->capture_default_str();
  serve->add_option("--lexicon", serve_lexicon, "Translation lexicon TSV");
  serve->add_option("--failure-trigger", serve_trigger, "Chat requests containing this text fail");
  serve->add_option("--embed-seed", serve_seed)->capture_default_str();
  serve->add_option("--embed-dims", serve_dims)->capture_default_str();
  serve->callback([&] {
    action = [&] { return cmd_serve_mocks(serve_host, serve_port, serve_lexicon, serve_trigger, serve_seed, serve_dims, out); };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigFailure;
  }

  try {
    return action();
  } catch (const index::BuildSuspended& e) {
    err << "error: " << e.what() << "\nrerun with --resume to continue\n";
    return kFatal;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const SchemaError& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const VersionError& e) {
    err << "version error: " << e.what() << "\n";
  } catch (const DimsMismatchError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "fatal: " << e.what() << "\n";
    return kFatal;
  }
  return kConfigFailure;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace mrag::cli
