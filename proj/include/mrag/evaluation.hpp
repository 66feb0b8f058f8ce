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

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrag/artifact.hpp"
#include "mrag/langid.hpp"
#include "mrag/language.hpp"
#include "mrag/prompting.hpp"

namespace mrag::evaluation {

struct NormalizationPolicy {
  bool lowercase = true;
  bool strip_punctuation = true;
  // Removed as whole tokens, only for the languages listed here.
  std::map<Lang, std::set<std::string>> article_lists;

  // English {a, an, the}; no articles for any other language.
  static NormalizationPolicy defaults();
};

// Lowercase, punctuation (category P) to spaces, drop article tokens of
// `lang`, collapse whitespace, trim. Idempotent.
std::string normalize(std::string_view text, Lang lang, const NormalizationPolicy& policy = NormalizationPolicy::defaults());

using NgramCounts = std::map<std::string, std::size_t>;

// Contiguous n-grams of code points. Tokens shorter than n contribute
// themselves as the single element.
NgramCounts char_ngrams(std::string_view token, std::size_t n = 3);

struct RecallDetail {
  double recall = 0.0;
  std::size_t matched = 0;
  std::size_t total = 0;
  // Every gold answer normalized to nothing; the query cannot be scored.
  bool empty_gold = false;
  // Index of the answer that produced the maximum.
  std::size_t best_answer = 0;
};

// Per answer: pooled token-wise 3-gram multiset of the normalized answer,
// count-aware intersection with the response grams, divided by the answer's
// gram count. The maximum over answers wins.
RecallDetail char3_recall_detail(std::span<const std::string> gold_answers, std::string_view response, Lang lang,
                                 const NormalizationPolicy& policy = NormalizationPolicy::defaults());

double char3_recall(std::span<const std::string> gold_answers, std::string_view response, Lang lang,
                    const NormalizationPolicy& policy = NormalizationPolicy::defaults());

// Whole-token analogue: fraction of normalized gold tokens present among the
// response tokens, max over answers.
double token_recall(std::span<const std::string> gold_answers, std::string_view response, Lang lang,
                    const NormalizationPolicy& policy = NormalizationPolicy::defaults());

inline constexpr std::size_t kClrMinChars = 20;

// Responses strictly longer than kClrMinChars code points.
bool clr_eligible(std::string_view response);

struct ClrSample {
  std::string response;
  Lang ul = Lang::en;
};

struct ClrResult {
  std::optional<double> clr_percent;  // nullopt when nothing is eligible
  std::size_t eligible = 0;
  std::size_t in_user_lang = 0;
  std::size_t identifier_failures = 0;
};

ClrResult correct_language_rate(std::span<const ClrSample> samples, langid::LanguageIdentifier& identifier);

// True iff some normalized gold answer is a substring of some normalized
// "title\ntext" in the context.
bool recall_at_k(std::span<const std::string> gold_answers, std::span<const corpus::Passage> context, Lang lang,
                 const NormalizationPolicy& policy = NormalizationPolicy::defaults());
bool recall_at_k(std::span<const std::string> gold_answers, const prompting::ContextSet& ctx, Lang lang,
                 const NormalizationPolicy& policy = NormalizationPolicy::defaults());

struct MetricRow {
  std::string query_id;
  std::string dataset;
  Lang lang = Lang::en;
  std::optional<double> char3_recall;  // nullopt: not scored
  std::string exclusion;               // "", "unanswerable", "empty_gold"
  bool clr_eligible = false;
  std::optional<bool> in_user_lang;
  std::optional<Lang> identified_lang;
  bool identifier_failed = false;
  std::optional<bool> recall_at_k;
  std::optional<bool> recall_at_k_first_stage;
};

// Aggregates for one (dataset, language, retrieval mode).
struct ReportRow {
  std::string dataset;
  Lang lang = Lang::en;
  artifact::RetrievalMode mode = artifact::RetrievalMode::none;
  std::size_t total = 0;
  std::size_t generated = 0;
  std::size_t errors = 0;
  std::size_t scored = 0;
  std::size_t empty_gold = 0;
  std::size_t unanswerable = 0;
  std::optional<double> char3_recall;  // mean x100
  std::optional<double> clr;           // percent of eligible
  std::size_t clr_eligible = 0;
  std::size_t identifier_failures = 0;
  std::optional<double> recall_at_k;              // reranked context, percent
  std::optional<double> recall_at_k_first_stage;  // before reranking, percent
};

struct EvalReport {
  std::string run_tag;
  std::string prompt_label;
  std::size_t k = 0;
  std::string langid_method;
  std::size_t total_queries = 0;
  std::size_t generated = 0;
  std::size_t errors = 0;
  // Built from the journal of an interrupted run.
  bool partial = false;
  std::vector<MetricRow> rows;
  std::vector<ReportRow> summary;
};

struct EvalOptions {
  NormalizationPolicy policy = NormalizationPolicy::defaults();
};

EvalReport aggregate(const artifact::RunArtifact& run, langid::LanguageIdentifier& identifier,
                     const EvalOptions& options = {});

nlohmann::json to_json(const MetricRow& row);
nlohmann::json to_json(const ReportRow& row);
nlohmann::json summary_json(const EvalReport& report);
ReportRow report_row_from_json(const nlohmann::json& obj);

enum class TableMetric { char3_recall, clr, recall_at_k };

TableMetric parse_table_metric(std::string_view name);

// Rows are languages, columns are retrieval modes; one table per dataset.
std::string render_table(std::span<const ReportRow> rows, TableMetric metric);

// Writes metrics.jsonl, summary.json and table.txt.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace mrag::evaluation
