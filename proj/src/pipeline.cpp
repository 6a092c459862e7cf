#include "pairrank/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pairrank/btagg.hpp"

namespace pairrank {

using json = nlohmann::ordered_json;

namespace {

std::vector<std::string> coarse_order(const CandidatePool& pool) {
  std::vector<std::string> out;
  out.reserve(pool.candidates.size() + pool.tail.size());
  for (const auto& c : pool.candidates) out.push_back(c.video_id);
  for (const auto& id : pool.tail) out.push_back(id);
  return out;
}

std::vector<CandidateRef> pool_refs(const CandidatePool& pool, const Corpus& corpus) {
  std::vector<CandidateRef> refs;
  refs.reserve(pool.candidates.size());
  for (const auto& c : pool.candidates) {
    refs.push_back({c.video_id,
                    render_annotation_block(corpus.annotations.at(c.video_id))});
  }
  return refs;
}

// Per-comparison reason texts for the explanation summary, from unique
// judgments only. Judges without textual reasons get a synthesized line
// so the summary is never empty.
std::vector<std::string> collect_reasons(const ComparisonLog& log) {
  std::vector<std::string> reasons;
  for (const auto& rec : log) {
    if (rec.cached) continue;
    if (!rec.reason.empty()) {
      reasons.push_back(rec.reason);
    } else {
      const std::string& loser =
          rec.winner_id == rec.left_id ? rec.right_id : rec.left_id;
      reasons.push_back(rec.winner_id + " preferred over " + loser);
    }
  }
  return reasons;
}

const char* judge_kind_name(JudgeKind k) {
  switch (k) {
    case JudgeKind::kOracle: return "oracle";
    case JudgeKind::kNoisyBt: return "noisy_bt";
    case JudgeKind::kLlm: return "llm";
  }
  return "unknown";
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["pool_size"] = cfg.pool_size;
  j["max_passes"] = cfg.max_passes;
  j["mode"] = cfg.mode == SweepMode::kSequential ? "sequential" : "odd_even";
  j["cache_policy"] =
      cfg.cache_policy == CacheKeyPolicy::kOrdered ? "ordered" : "unordered";
  j["early_stop"] = cfg.early_stop;
  j["alpha"] = cfg.alpha;
  j["tol"] = cfg.tol;
  j["max_iter"] = cfg.max_iter;
  j["seed"] = cfg.seed;
  j["judge"] = judge_kind_name(cfg.judge_kind);
  j["noisy_gamma"] = cfg.noisy_gamma;
  j["fallback_coarse"] = cfg.fallback_coarse;
  j["parallel_queries"] = cfg.parallel_queries;
  j["max_in_flight"] = cfg.max_in_flight;
  if (cfg.judge_kind == JudgeKind::kLlm) {
    j["llm"] = {{"base_url", cfg.llm.base_url},
                {"path", cfg.llm.path},
                {"model", cfg.llm.model},
                {"temperature", cfg.llm.temperature},
                {"max_retries", cfg.llm.max_retries}};
  }
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  cfg.pool_size = j.at("pool_size").get<int>();
  cfg.max_passes = j.at("max_passes").get<int>();
  cfg.mode = j.at("mode").get<std::string>() == "odd_even" ? SweepMode::kOddEven
                                                           : SweepMode::kSequential;
  cfg.cache_policy = j.at("cache_policy").get<std::string>() == "unordered"
                         ? CacheKeyPolicy::kUnordered
                         : CacheKeyPolicy::kOrdered;
  cfg.early_stop = j.at("early_stop").get<bool>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.tol = j.at("tol").get<double>();
  cfg.max_iter = j.at("max_iter").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  const std::string judge = j.at("judge").get<std::string>();
  cfg.judge_kind = judge == "oracle" ? JudgeKind::kOracle
                   : judge == "llm" ? JudgeKind::kLlm
                                    : JudgeKind::kNoisyBt;
  cfg.noisy_gamma = j.at("noisy_gamma").get<double>();
  cfg.fallback_coarse = j.at("fallback_coarse").get<bool>();
  cfg.parallel_queries = j.at("parallel_queries").get<int>();
  cfg.max_in_flight = j.at("max_in_flight").get<int>();
  return cfg;
}

json metrics_to_json(const MetricsReport& m) {
  json j;
  j["r_at_1"] = m.r_at_1;
  j["r_at_5"] = m.r_at_5;
  j["r_at_10"] = m.r_at_10;
  j["mdr"] = m.mdr;
  j["mnr"] = m.mnr;
  j["n_queries"] = m.n_queries;
  return j;
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport m;
  m.r_at_1 = j.at("r_at_1").get<double>();
  m.r_at_5 = j.at("r_at_5").get<double>();
  m.r_at_10 = j.at("r_at_10").get<double>();
  m.mdr = j.at("mdr").get<double>();
  m.mnr = j.at("mnr").get<double>();
  m.n_queries = j.at("n_queries").get<int>();
  return m;
}

QueryResult degraded_result(const CandidatePool& pool, const std::string& error,
                            const SweepResult* partial) {
  QueryResult qr;
  qr.query_id = pool.query_id;
  qr.degraded = true;
  qr.error = error;
  qr.final_ranking = coarse_order(pool);
  if (partial) {
    qr.window_order = partial->window_order;
    qr.log = partial->log;
    qr.passes_run = partial->passes_run;
  }
  return qr;
}

}  // namespace

std::unique_ptr<Judge> make_judge(const RunConfig& cfg, const CandidatePool& pool,
                                  const Corpus& corpus, LlmClient* client) {
  switch (cfg.judge_kind) {
    case JudgeKind::kOracle: {
      // Relevant videos first (coarse order among them), then the rest.
      const auto& relevant = corpus.qrels.at(pool.query_id);
      std::vector<std::string> order;
      const auto all = coarse_order(pool);
      for (const auto& id : all) {
        if (relevant.count(id) > 0) order.push_back(id);
      }
      for (const auto& id : all) {
        if (relevant.count(id) == 0) order.push_back(id);
      }
      return std::make_unique<OracleJudge>(order);
    }
    case JudgeKind::kNoisyBt: {
      std::unordered_map<std::string, double> theta;
      const int k = static_cast<int>(pool.candidates.size());
      for (const auto& c : pool.candidates) {
        theta[c.video_id] = std::pow(cfg.noisy_gamma, k - c.coarse_rank);
      }
      return std::make_unique<NoisyBtJudge>(std::move(theta), cfg.seed);
    }
    case JudgeKind::kLlm:
      if (client == nullptr) {
        throw std::invalid_argument("make_judge: llm judge needs a client");
      }
      return std::make_unique<LlmJudge>(*client);
  }
  throw std::invalid_argument("make_judge: unknown judge kind");
}

QueryResult rerank_query(const CandidatePool& pool, const Corpus& corpus,
                         const RunConfig& cfg, Judge& inner_judge) {
  const auto refs = pool_refs(pool, corpus);
  CachedJudge cached(inner_judge, cfg.cache_policy);

  SweepConfig sweep_cfg;
  sweep_cfg.max_passes = cfg.max_passes;
  sweep_cfg.mode = cfg.mode;
  sweep_cfg.early_stop = cfg.early_stop;
  sweep_cfg.max_in_flight = cfg.max_in_flight;

  SweepResult sweep;
  try {
    sweep = sweep_rerank(pool.query_id, pool.query_text, refs, cached, sweep_cfg);
  } catch (const SweepAbortedError& e) {
    if (!cfg.fallback_coarse) throw;
    auto qr = degraded_result(pool, e.what(), &e.partial());
    qr.stats = cached.stats();
    return qr;
  }

  QueryResult qr;
  qr.query_id = pool.query_id;
  qr.window_order = sweep.window_order;
  qr.log = sweep.log;
  qr.passes_run = sweep.passes_run;
  qr.stats = cached.stats();

  std::vector<std::string> pool_ids;
  std::vector<int> coarse_rank;
  for (const auto& c : pool.candidates) {
    pool_ids.push_back(c.video_id);
    coarse_rank.push_back(c.coarse_rank);
  }
  const PreferenceMatrix pm = build_preference_matrix(pool_ids, sweep.log);
  BtOptions bt_opt;
  bt_opt.alpha = cfg.alpha;
  bt_opt.tol = cfg.tol;
  bt_opt.max_iter = cfg.max_iter;
  const AbilityVector ability = fit_bt(pm, bt_opt);
  qr.bt_iterations = ability.iterations;
  qr.bt_converged = ability.converged;
  for (std::size_t i = 0; i < pool_ids.size(); ++i) {
    qr.theta[pool_ids[i]] = ability.theta(static_cast<Eigen::Index>(i));
  }

  qr.final_ranking = rank_by_ability(pool_ids, ability.theta, coarse_rank);
  qr.final_ranking.insert(qr.final_ranking.end(), pool.tail.begin(),
                          pool.tail.end());

  try {
    qr.explanation = cached.summarize_reasons(collect_reasons(sweep.log));
  } catch (const JudgeError& e) {
    if (!cfg.fallback_coarse) throw;
    qr.explanation = join_reasons_numbered(collect_reasons(sweep.log));
  }
  return qr;
}

RunReport run(const RunConfig& cfg, const Corpus& corpus) {
  if (cfg.alpha <= 0.0) throw ValidationError("run: alpha must be positive");
  if (cfg.pool_size < 2) throw ValidationError("run: pool size must be >= 2");
  if (corpus.pools.empty()) throw ValidationError("run: empty corpus");

  std::unique_ptr<LlmClient> client;
  if (cfg.judge_kind == JudgeKind::kLlm) {
    client = std::make_unique<LlmClient>(cfg.llm);
  }

  RunReport report;
  report.config = cfg;
  report.queries.resize(corpus.pools.size());

  auto process = [&](std::size_t qi) {
    const CandidatePool& pool = corpus.pools[qi];
    auto judge = make_judge(cfg, pool, corpus, client.get());
    try {
      report.queries[qi] = rerank_query(pool, corpus, cfg, *judge);
    } catch (const SweepAbortedError& e) {
      report.queries[qi] = degraded_result(pool, e.what(), &e.partial());
    } catch (const JudgeError& e) {
      report.queries[qi] = degraded_result(pool, e.what(), nullptr);
    }
  };

  const std::size_t parallel =
      cfg.parallel_queries > 0 ? static_cast<std::size_t>(cfg.parallel_queries) : 1;
  for (std::size_t start = 0; start < corpus.pools.size(); start += parallel) {
    const std::size_t end = std::min(corpus.pools.size(), start + parallel);
    std::vector<std::future<void>> futures;
    for (std::size_t qi = start; qi < end; ++qi) {
      futures.push_back(std::async(std::launch::async, process, qi));
    }
    for (auto& f : futures) f.get();
  }

  std::vector<int> baseline_ranks;
  std::vector<int> reranked_ranks;
  for (std::size_t qi = 0; qi < corpus.pools.size(); ++qi) {
    const CandidatePool& pool = corpus.pools[qi];
    const auto& relevant = corpus.qrels.at(pool.query_id);
    baseline_ranks.push_back(rank_of_truth(coarse_order(pool), relevant));
    reranked_ranks.push_back(
        rank_of_truth(report.queries[qi].final_ranking, relevant));
    if (report.queries[qi].degraded && !cfg.fallback_coarse) {
      ++report.failed_queries;
    }
  }
  report.baseline = compute_metrics(baseline_ranks);
  report.reranked = compute_metrics(reranked_ranks);
  return report;
}

void write_run_artifacts(const RunReport& report, const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);

  {
    std::ofstream out(outdir / "config.json");
    out << config_to_json(report.config).dump(2) << '\n';
  }
  {
    std::ofstream rankings(outdir / "rankings.jsonl");
    std::ofstream comparisons(outdir / "comparisons.jsonl");
    std::ofstream explanations(outdir / "explanations.jsonl");
    for (const auto& q : report.queries) {
      json r;
      r["query_id"] = q.query_id;
      r["final_ranking"] = q.final_ranking;
      r["window_order"] = q.window_order;
      r["degraded"] = q.degraded;
      rankings << r.dump() << '\n';

      for (const auto& rec : q.log) {
        json c;
        c["query_id"] = q.query_id;
        c["pass"] = rec.pass;
        c["position"] = rec.position;
        c["left"] = rec.left_id;
        c["right"] = rec.right_id;
        c["winner"] = rec.winner_id;
        c["cached"] = rec.cached;
        c["reason"] = rec.reason;
        comparisons << c.dump() << '\n';
      }

      json e;
      e["query_id"] = q.query_id;
      e["explanation"] = q.explanation;
      explanations << e.dump() << '\n';
    }
  }

  json j;
  j["artifact_version"] = report.artifact_version;
  j["config"] = config_to_json(report.config);
  j["metrics"] = {{"baseline", metrics_to_json(report.baseline)},
                  {"reranked", metrics_to_json(report.reranked)}};
  j["failed_queries"] = report.failed_queries;
  j["queries"] = json::array();
  for (const auto& q : report.queries) {
    json qj;
    qj["query_id"] = q.query_id;
    qj["degraded"] = q.degraded;
    if (q.degraded) qj["error"] = q.error;
    qj["final_ranking"] = q.final_ranking;
    qj["window_order"] = q.window_order;
    qj["theta"] = q.theta;
    qj["explanation"] = q.explanation;
    qj["stats"] = {{"issued_comparisons", q.stats.issued_comparisons},
                   {"unique_calls", q.stats.unique_calls},
                   {"cache_hits", q.stats.cache_hits}};
    qj["passes_run"] = q.passes_run;
    qj["bt_iterations"] = q.bt_iterations;
    qj["bt_converged"] = q.bt_converged;
    j["queries"].push_back(std::move(qj));
  }
  std::ofstream out(outdir / "report.json");
  out << j.dump(2) << '\n';
}

RunReport load_report(const std::filesystem::path& report_json) {
  std::ifstream in(report_json);
  if (!in) throw ValidationError("cannot open report: " + report_json.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("malformed report: " + std::string(e.what()));
  }

  RunReport report;
  report.artifact_version = j.at("artifact_version").get<std::string>();
  report.config = config_from_json(j.at("config"));
  report.baseline = metrics_from_json(j.at("metrics").at("baseline"));
  report.reranked = metrics_from_json(j.at("metrics").at("reranked"));
  report.failed_queries = j.at("failed_queries").get<int>();
  for (const auto& qj : j.at("queries")) {
    QueryResult q;
    q.query_id = qj.at("query_id").get<std::string>();
    q.degraded = qj.at("degraded").get<bool>();
    if (q.degraded) q.error = qj.at("error").get<std::string>();
    q.final_ranking = qj.at("final_ranking").get<std::vector<std::string>>();
    q.window_order = qj.at("window_order").get<std::vector<std::string>>();
    q.theta = qj.at("theta").get<std::map<std::string, double>>();
    q.explanation = qj.at("explanation").get<std::string>();
    q.stats.issued_comparisons = qj.at("stats").at("issued_comparisons").get<std::int64_t>();
    q.stats.unique_calls = qj.at("stats").at("unique_calls").get<std::int64_t>();
    q.stats.cache_hits = qj.at("stats").at("cache_hits").get<std::int64_t>();
    q.passes_run = qj.at("passes_run").get<int>();
    q.bt_iterations = qj.at("bt_iterations").get<int>();
    q.bt_converged = qj.at("bt_converged").get<bool>();
    report.queries.push_back(std::move(q));
  }
  return report;
}

std::string format_metrics_table(
    const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::ostringstream out;
  out << "method            R@1     R@5    R@10     MdR     MnR  queries\n";
  for (const auto& [name, m] : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-14s %6.1f  %6.1f  %6.1f  %6.1f  %6.1f  %7d\n",
                  name.c_str(), m.r_at_1, m.r_at_5, m.r_at_10, m.mdr, m.mnr,
                  m.n_queries);
    out << buf;
  }
  return out.str();
}

}  // namespace pairrank
