#ifndef PAIRRANK_PIPELINE_HPP
#define PAIRRANK_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pairrank/io.hpp"
#include "pairrank/llm.hpp"
#include "pairrank/ranker.hpp"

namespace pairrank {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct RunConfig {
  int pool_size = 20;   // K
  int max_passes = 10;  // P
  SweepMode mode = SweepMode::kSequential;
  CacheKeyPolicy cache_policy = CacheKeyPolicy::kOrdered;
  bool early_stop = true;
  double alpha = 1e-3;
  double tol = 1e-8;
  int max_iter = 1000;
  std::uint64_t seed = 1;
  JudgeKind judge_kind = JudgeKind::kOracle;
  double noisy_gamma = 1.3;  // ability spacing for the simulated judge
  bool fallback_coarse = false;
  int parallel_queries = 1;
  int max_in_flight = 4;
  LlmConfig llm;
};

struct QueryResult {
  std::string query_id;
  bool degraded = false;  // judge failed; coarse order used
  std::string error;      // failure message when degraded
  std::vector<std::string> final_ranking;  // refit pool order + coarse tail
  std::vector<std::string> window_order;
  std::map<std::string, double> theta;
  std::string explanation;
  JudgeStats stats;
  int passes_run = 0;
  int bt_iterations = 0;
  bool bt_converged = false;
  ComparisonLog log;
};

struct RunReport {
  std::string artifact_version = kArtifactVersion;
  RunConfig config;
  std::vector<QueryResult> queries;
  MetricsReport baseline;
  MetricsReport reranked;
  int failed_queries = 0;  // judge failures (degraded without fallback opt-in)
};

// Builds the per-query inner judge. The oracle ranks relevant videos
// first and then follows the coarse order; the noisy judge spaces
// abilities geometrically by coarse rank. The LLM judge wraps `client`,
// which must outlive the returned judge and be non-null for kLlm.
std::unique_ptr<Judge> make_judge(const RunConfig& cfg, const CandidatePool& pool,
                                  const Corpus& corpus, LlmClient* client);

// One query end to end: sweep, refit abilities from the unique edges,
// rank, append the coarse tail, summarize reasons. With fallback_coarse a
// judge failure degrades to the coarse order; otherwise it propagates
// (partial log attached via SweepAbortedError).
QueryResult rerank_query(const CandidatePool& pool, const Corpus& corpus,
                         const RunConfig& cfg, Judge& inner_judge);

// Re-ranks every query (concurrently up to cfg.parallel_queries, outputs
// in corpus order) and computes baseline and re-ranked metrics.
RunReport run(const RunConfig& cfg, const Corpus& corpus);

// Output directory layout: report.json, rankings.jsonl, comparisons.jsonl,
// explanations.jsonl, config.json.
void write_run_artifacts(const RunReport& report, const std::filesystem::path& outdir);

// Reads back report.json (comparison logs live in comparisons.jsonl and
// are not reloaded).
RunReport load_report(const std::filesystem::path& report_json);

std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace pairrank

#endif  // PAIRRANK_PIPELINE_HPP
