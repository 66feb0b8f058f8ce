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

#include "mrag/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "mrag/error.hpp"
#include "mrag/io.hpp"
#include "mrag/text.hpp"

namespace mrag::evaluation {

using nlohmann::json;

NormalizationPolicy NormalizationPolicy::defaults() {
  NormalizationPolicy p;
  p.article_lists[Lang::en] = {"a", "an", "the"};
  return p;
}

namespace {

std::vector<std::string> normalized_tokens(std::string_view input, Lang lang, const NormalizationPolicy& policy);

std::set<std::string> article_tokens(Lang lang, const NormalizationPolicy& policy) {
  std::set<std::string> out;
  auto it = policy.article_lists.find(lang);
  if (it == policy.article_lists.end()) return out;
  NormalizationPolicy bare = policy;
  bare.article_lists.clear();
  // "l'" and similar elided forms reduce to the same token the text does.
  for (const auto& a : it->second) {
    for (auto& t : normalized_tokens(a, lang, bare)) out.insert(std::move(t));
  }
  return out;
}

std::vector<std::string> normalized_tokens(std::string_view input, Lang lang, const NormalizationPolicy& policy) {
  std::string s = policy.lowercase ? text::lowercase(input) : std::string(input);
  if (policy.strip_punctuation) {
    auto cps = text::to_code_points(s);
    for (auto& c : cps) {
      if (text::is_punctuation(c)) c = U' ';
    }
    s = text::to_utf8(cps);
  }
  auto tokens = text::split_whitespace(s);
  auto articles = article_tokens(lang, policy);
  if (!articles.empty()) {
    std::erase_if(tokens, [&](const std::string& t) { return articles.count(t) > 0; });
  }
  return tokens;
}

void add_counts(NgramCounts& into, const NgramCounts& from) {
  for (const auto& [g, c] : from) into[g] += c;
}

// Response side: 3-grams plus every shorter substring of each token, so a
// short gold token matches wherever it occurs inside a response token.
NgramCounts response_grams(const std::vector<std::string>& tokens) {
  NgramCounts out;
  for (const auto& token : tokens) {
    auto cps = text::to_code_points(token);
    for (std::size_t len = 1; len <= 3; ++len) {
      for (std::size_t i = 0; i + len <= cps.size(); ++i) {
        ++out[text::to_utf8(std::u32string_view(cps).substr(i, len))];
      }
    }
  }
  return out;
}

std::optional<double> mean_percent(double sum, std::size_t n) {
  if (n == 0) return std::nullopt;
  return 100.0 * sum / static_cast<double>(n);
}

}  // namespace

std::string normalize(std::string_view input, Lang lang, const NormalizationPolicy& policy) {
  return text::join(normalized_tokens(input, lang, policy), " ");
}

NgramCounts char_ngrams(std::string_view token, std::size_t n) {
  NgramCounts out;
  auto cps = text::to_code_points(token);
  if (cps.empty()) return out;
  if (cps.size() < n) {
    ++out[std::string(token)];
    return out;
  }
  for (std::size_t i = 0; i + n <= cps.size(); ++i) ++out[text::to_utf8(std::u32string_view(cps).substr(i, n))];
  return out;
}

RecallDetail char3_recall_detail(std::span<const std::string> gold_answers, std::string_view response, Lang lang,
                                 const NormalizationPolicy& policy) {
  auto resp = response_grams(normalized_tokens(response, lang, policy));
  RecallDetail best;
  best.empty_gold = true;
  for (std::size_t a = 0; a < gold_answers.size(); ++a) {
    NgramCounts gold;
    for (const auto& token : normalized_tokens(gold_answers[a], lang, policy)) add_counts(gold, char_ngrams(token));
    std::size_t total = 0;
    std::size_t matched = 0;
    for (const auto& [g, c] : gold) {
      total += c;
      auto it = resp.find(g);
      if (it != resp.end()) matched += std::min(c, it->second);
    }
    if (total == 0) continue;
    double recall = static_cast<double>(matched) / static_cast<double>(total);
    if (best.empty_gold || recall > best.recall) {
      best = RecallDetail{recall, matched, total, false, a};
    }
  }
  return best;
}

double char3_recall(std::span<const std::string> gold_answers, std::string_view response, Lang lang,
                    const NormalizationPolicy& policy) {
  return char3_recall_detail(gold_answers, response, lang, policy).recall;
}

double token_recall(std::span<const std::string> gold_answers, std::string_view response, Lang lang,
                    const NormalizationPolicy& policy) {
  auto r = normalized_tokens(response, lang, policy);
  std::set<std::string> resp(r.begin(), r.end());
  double best = 0.0;
  for (const auto& answer : gold_answers) {
    auto gold = normalized_tokens(answer, lang, policy);
    if (gold.empty()) continue;
    std::size_t hit = 0;
    for (const auto& t : gold) hit += resp.count(t);
    best = std::max(best, static_cast<double>(hit) / static_cast<double>(gold.size()));
  }
  return best;
}

bool clr_eligible(std::string_view response) { return text::code_point_count(response) > kClrMinChars; }

ClrResult correct_language_rate(std::span<const ClrSample> samples, langid::LanguageIdentifier& identifier) {
  ClrResult result;
  for (const auto& s : samples) {
    if (!clr_eligible(s.response)) continue;
    langid::LangVerdict verdict;
    try {
      verdict = identifier.identify(s.response);
    } catch (const Error&) {
      ++result.identifier_failures;
      continue;
    }
    ++result.eligible;
    if (verdict.lang == s.ul) ++result.in_user_lang;
  }
  if (result.eligible) {
    result.clr_percent = 100.0 * static_cast<double>(result.in_user_lang) / static_cast<double>(result.eligible);
  }
  return result;
}

bool recall_at_k(std::span<const std::string> gold_answers, std::span<const corpus::Passage> context, Lang lang,
                 const NormalizationPolicy& policy) {
  std::vector<std::string> golds;
  for (const auto& g : gold_answers) {
    auto n = normalize(g, lang, policy);
    if (!n.empty()) golds.push_back(std::move(n));
  }
  for (const auto& p : context) {
    auto hay = normalize(corpus::joined_text(p), lang, policy);
    for (const auto& g : golds) {
      if (hay.find(g) != std::string::npos) return true;
    }
  }
  return false;
}

bool recall_at_k(std::span<const std::string> gold_answers, const prompting::ContextSet& ctx, Lang lang,
                 const NormalizationPolicy& policy) {
  return recall_at_k(gold_answers, std::span<const corpus::Passage>(ctx.passages), lang, policy);
}

namespace {

std::vector<corpus::Passage> as_passages(const std::vector<artifact::ContextEntry>& entries) {
  std::vector<corpus::Passage> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back({e.passage_id, "", e.title, e.text, e.lang, 0});
  return out;
}

}  // namespace

EvalReport aggregate(const artifact::RunArtifact& run, langid::LanguageIdentifier& identifier,
                     const EvalOptions& options) {
  const auto& config = run.manifest.config;
  const auto mode = artifact::parse_mode(config.value("retrieval_mode", "none"));
  EvalReport report;
  report.run_tag = config.value("tag", "");
  report.prompt_label = config.value("prompt_label", "");
  report.k = mode == artifact::RetrievalMode::none ? 0 : config.value("top_k_context", std::size_t{0});
  report.langid_method = std::string(langid::to_string(identifier.method()));
  report.total_queries = run.manifest.total_queries;
  report.generated = run.records.size();
  report.errors = run.errors.size();
  report.partial = run.from_journal;

  struct Sums {
    ReportRow row;
    double char3 = 0.0;
    std::size_t clr_in = 0;
    std::size_t recall_hits = 0;
    std::size_t recall_first_hits = 0;
    std::size_t recall_n = 0;
  };
  auto key_of = [](const std::string& dataset, Lang lang) { return std::make_pair(dataset, static_cast<int>(lang)); };
  std::map<std::pair<std::string, int>, Sums> groups;
  auto group = [&](const std::string& dataset, Lang lang) -> Sums& {
    auto& g = groups[key_of(dataset, lang)];
    g.row.dataset = dataset;
    g.row.lang = lang;
    g.row.mode = mode;
    return g;
  };

  for (const auto& rec : run.records) {
    MetricRow row;
    row.query_id = rec.query_id;
    row.dataset = rec.dataset;
    row.lang = rec.ul;
    auto& g = group(rec.dataset, rec.ul);
    ++g.row.total;
    ++g.row.generated;

    if (rec.unanswerable) {
      row.exclusion = "unanswerable";
      ++g.row.unanswerable;
    } else {
      auto detail = char3_recall_detail(rec.gold_answers, rec.response, rec.ul, options.policy);
      if (detail.empty_gold) {
        row.exclusion = "empty_gold";
        ++g.row.empty_gold;
      } else {
        row.char3_recall = detail.recall;
        g.char3 += detail.recall;
        ++g.row.scored;
      }
    }

    row.clr_eligible = clr_eligible(rec.response);
    if (row.clr_eligible) {
      try {
        auto verdict = identifier.identify(rec.response);
        row.identified_lang = verdict.lang;
        row.in_user_lang = verdict.lang == rec.ul;
        ++g.row.clr_eligible;
        g.clr_in += *row.in_user_lang ? 1 : 0;
      } catch (const Error&) {
        row.identifier_failed = true;
        ++g.row.identifier_failures;
      }
    }

    if (mode != artifact::RetrievalMode::none && row.exclusion.empty()) {
      row.recall_at_k = recall_at_k(rec.gold_answers, as_passages(rec.context), rec.ul, options.policy);
      row.recall_at_k_first_stage = recall_at_k(rec.gold_answers, as_passages(rec.first_stage), rec.ul, options.policy);
      ++g.recall_n;
      g.recall_hits += *row.recall_at_k ? 1 : 0;
      g.recall_first_hits += *row.recall_at_k_first_stage ? 1 : 0;
    }
    report.rows.push_back(std::move(row));
  }
  for (const auto& err : run.errors) {
    auto& g = group(err.dataset, err.lang);
    ++g.row.total;
    ++g.row.errors;
  }

  std::sort(report.rows.begin(), report.rows.end(),
            [](const MetricRow& a, const MetricRow& b) { return a.query_id < b.query_id; });
  for (auto& [key, g] : groups) {
    g.row.char3_recall = mean_percent(g.char3, g.row.scored);
    g.row.clr = mean_percent(static_cast<double>(g.clr_in), g.row.clr_eligible);
    g.row.recall_at_k = mean_percent(static_cast<double>(g.recall_hits), g.recall_n);
    g.row.recall_at_k_first_stage = mean_percent(static_cast<double>(g.recall_first_hits), g.recall_n);
    report.summary.push_back(g.row);
  }
  return report;
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return obj.at(key).get<T>();
}

}  // namespace

json to_json(const MetricRow& r) {
  return json{{"query_id", r.query_id},
              {"dataset", r.dataset},
              {"lang", to_string(r.lang)},
              {"char3_recall", opt(r.char3_recall)},
              {"exclusion", r.exclusion},
              {"clr_eligible", r.clr_eligible},
              {"in_user_lang", opt(r.in_user_lang)},
              {"identified_lang", r.identified_lang ? json(to_string(*r.identified_lang)) : json(nullptr)},
              {"identifier_failed", r.identifier_failed},
              {"recall_at_k", opt(r.recall_at_k)},
              {"recall_at_k_first_stage", opt(r.recall_at_k_first_stage)}};
}

json to_json(const ReportRow& r) {
  return json{{"dataset", r.dataset},
              {"lang", to_string(r.lang)},
              {"mode", artifact::to_string(r.mode)},
              {"total", r.total},
              {"generated", r.generated},
              {"errors", r.errors},
              {"scored", r.scored},
              {"empty_gold", r.empty_gold},
              {"unanswerable", r.unanswerable},
              {"char3_recall", opt(r.char3_recall)},
              {"clr", opt(r.clr)},
              {"clr_eligible", r.clr_eligible},
              {"identifier_failures", r.identifier_failures},
              {"recall_at_k", opt(r.recall_at_k)},
              {"recall_at_k_first_stage", opt(r.recall_at_k_first_stage)}};
}

ReportRow report_row_from_json(const json& obj) {
  ReportRow r;
  r.dataset = obj.at("dataset");
  r.lang = parse_language(obj.at("lang").get<std::string>());
  r.mode = artifact::parse_mode(obj.at("mode").get<std::string>());
  r.total = obj.at("total");
  r.generated = obj.at("generated");
  r.errors = obj.at("errors");
  r.scored = obj.at("scored");
  r.empty_gold = obj.at("empty_gold");
  r.unanswerable = obj.at("unanswerable");
  r.char3_recall = opt_from<double>(obj, "char3_recall");
  r.clr = opt_from<double>(obj, "clr");
  r.clr_eligible = obj.at("clr_eligible");
  r.identifier_failures = obj.at("identifier_failures");
  r.recall_at_k = opt_from<double>(obj, "recall_at_k");
  r.recall_at_k_first_stage = opt_from<double>(obj, "recall_at_k_first_stage");
  return r;
}

json summary_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.summary) rows.push_back(to_json(r));
  return json{{"run_tag", report.run_tag},
              {"prompt_label", report.prompt_label},
              {"k", report.k},
              {"recall_stage", "reranked; first_stage = before reranking"},
              {"langid_method", report.langid_method},
              {"coverage", {{"total_queries", report.total_queries},
                            {"generated", report.generated},
                            {"errors", report.errors},
                            {"partial", report.partial}}},
              {"rows", rows}};
}

TableMetric parse_table_metric(std::string_view name) {
  if (name == "char3" || name == "char3_recall") return TableMetric::char3_recall;
  if (name == "clr") return TableMetric::clr;
  if (name == "recall" || name == "recall_at_k") return TableMetric::recall_at_k;
  throw ConfigError("unknown table metric '" + std::string(name) + "' (expected char3, clr, recall)");
}

std::string render_table(std::span<const ReportRow> rows, TableMetric metric) {
  std::map<std::string, std::vector<const ReportRow*>> by_dataset;
  for (const auto& r : rows) by_dataset[r.dataset].push_back(&r);

  const char* metric_name = metric == TableMetric::char3_recall ? "Character 3-gram recall"
                            : metric == TableMetric::clr        ? "Correct language rate"
                                                                : "Retrieval recall@k";
  std::string out;
  for (const auto& [dataset, items] : by_dataset) {
    std::vector<artifact::RetrievalMode> modes;
    for (auto m : artifact::kAllModes) {
      if (std::any_of(items.begin(), items.end(), [&](const ReportRow* r) { return r->mode == m; })) modes.push_back(m);
    }
    std::vector<Lang> langs;
    for (auto l : kAllLanguages) {
      if (std::any_of(items.begin(), items.end(), [&](const ReportRow* r) { return r->lang == l; })) langs.push_back(l);
    }
    out += fmt::format("{} ({})\n", dataset.empty() ? "dataset" : dataset, metric_name);
    std::size_t width = 8;
    for (auto m : modes) width = std::max(width, artifact::display_name(m).size());
    out += fmt::format("{:<6}", "lang");
    for (auto m : modes) out += fmt::format(" | {:>{}}", artifact::display_name(m), width);
    out += "\n";
    out += std::string(6, '-');
    for (std::size_t i = 0; i < modes.size(); ++i) out += "-+-" + std::string(width, '-');
    out += "\n";
    for (auto l : langs) {
      out += fmt::format("{:<6}", to_string(l));
      for (auto m : modes) {
        std::optional<double> value;
        bool present = false;
        for (const auto* r : items) {
          if (r->lang != l || r->mode != m) continue;
          present = true;
          value = metric == TableMetric::char3_recall ? r->char3_recall
                  : metric == TableMetric::clr        ? r->clr
                                                      : r->recall_at_k;
        }
        out += fmt::format(" | {:>{}}", value ? fmt::format("{:.1f}", *value) : std::string(present ? "n/a" : "-"),
                           width);
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string metrics;
  for (const auto& r : report.rows) metrics += to_json(r).dump() + "\n";
  io::write_file_atomic(dir / "metrics.jsonl", metrics);
  io::write_file_atomic(dir / "summary.json", summary_json(report).dump(2) + "\n");
  std::string table;
  for (auto m : {TableMetric::char3_recall, TableMetric::clr, TableMetric::recall_at_k}) {
    table += render_table(report.summary, m);
  }
  io::write_file_atomic(dir / "table.txt", table);
}

}  // namespace mrag::evaluation
