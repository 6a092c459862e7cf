// Command-line front end: one verb per pipeline stage.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pairrank/annotate.hpp"
#include "pairrank/eval.hpp"
#include "pairrank/io.hpp"
#include "pairrank/pipeline.hpp"

#ifndef PAIRRANK_DATA_DIR
#define PAIRRANK_DATA_DIR "data"
#endif

namespace {

using pairrank::ValidationError;
using json = nlohmann::ordered_json;

std::string data_file(const char* name) {
  return std::string(PAIRRANK_DATA_DIR) + "/" + name;
}

void add_mode_option(CLI::App* cmd, std::string& mode) {
  cmd->add_option("--mode", mode, "sweep mode: sequential|odd-even")
      ->check(CLI::IsMember({"sequential", "odd-even"}));
}

pairrank::SweepMode parse_mode(const std::string& mode) {
  return mode == "odd-even" ? pairrank::SweepMode::kOddEven
                            : pairrank::SweepMode::kSequential;
}

pairrank::CacheKeyPolicy parse_policy(const std::string& policy) {
  return policy == "unordered" ? pairrank::CacheKeyPolicy::kUnordered
                               : pairrank::CacheKeyPolicy::kOrdered;
}

std::map<std::string, std::vector<std::string>> load_rankings_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open rankings file: " + path);
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      out[rec.at("query_id").get<std::string>()] =
          rec.at("final_ranking").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

pairrank::MetricsReport metrics_for_rankings(
    const std::map<std::string, std::vector<std::string>>& rankings,
    const pairrank::Qrels& qrels) {
  std::vector<int> ranks;
  for (const auto& [qid, ranking] : rankings) {
    auto it = qrels.find(qid);
    if (it == qrels.end()) throw ValidationError("no qrels for query " + qid);
    ranks.push_back(pairrank::rank_of_truth(ranking, it->second));
  }
  return pairrank::compute_metrics(ranks);
}

int run_main(int argc, char** argv) {
  CLI::App app{"pairwise-judgment re-ranking for text-to-video retrieval"};
  app.require_subcommand(1);

  // ---- rerank ----
  auto* rerank = app.add_subcommand("rerank", "re-rank a corpus and write run artifacts");
  std::string candidates, annotations, qrels_path, outdir;
  rerank->add_option("--candidates", candidates)->required();
  rerank->add_option("--annotations", annotations)->required();
  rerank->add_option("--qrels", qrels_path)->required();
  rerank->add_option("--out", outdir, "output directory")->required();
  pairrank::RunConfig cfg;
  std::string mode = "sequential", policy = "ordered", judge = "oracle";
  rerank->add_option("--k", cfg.pool_size, "pool size (top-K)");
  rerank->add_option("--passes", cfg.max_passes, "max sweep passes");
  add_mode_option(rerank, mode);
  rerank->add_option("--cache-policy", policy, "ordered|unordered")
      ->check(CLI::IsMember({"ordered", "unordered"}));
  rerank->add_flag("!--no-early-stop", cfg.early_stop, "run all passes");
  rerank->add_option("--judge", judge, "oracle|noisy|llm")
      ->check(CLI::IsMember({"oracle", "noisy", "llm"}));
  rerank->add_option("--gamma", cfg.noisy_gamma, "noisy-judge ability spacing");
  rerank->add_option("--seed", cfg.seed);
  rerank->add_option("--alpha", cfg.alpha, "refit prior weight");
  rerank->add_option("--tol", cfg.tol, "refit convergence tolerance");
  rerank->add_flag("--fallback-coarse", cfg.fallback_coarse,
                   "degrade to coarse order on judge failure");
  rerank->add_option("--parallel", cfg.parallel_queries, "concurrent queries");
  rerank->add_option("--in-flight", cfg.max_in_flight,
                     "concurrent judgments per odd/even phase");
  rerank->add_option("--endpoint", cfg.llm.base_url, "llm base url");
  rerank->add_option("--endpoint-path", cfg.llm.path);
  rerank->add_option("--model", cfg.llm.model);
  rerank->add_option("--transcript", cfg.llm.transcript_path,
                     "mirror llm requests/responses to this jsonl file");

  // ---- evaluate ----
  auto* evaluate = app.add_subcommand("evaluate", "compute retrieval metrics");
  std::string ev_candidates, ev_qrels, ev_rankings, ev_rankings_b;
  int ev_k = 20;
  evaluate->add_option("--candidates", ev_candidates)->required();
  evaluate->add_option("--qrels", ev_qrels)->required();
  evaluate->add_option("--k", ev_k);
  evaluate->add_option("--rankings", ev_rankings, "rankings.jsonl from a run");
  evaluate->add_option("--rankings-b", ev_rankings_b, "second rankings file to compare");
  std::string expl_emb, base_emb, refined_emb;
  evaluate->add_option("--expl-emb", expl_emb, "explanation embeddings (faithfulness)");
  evaluate->add_option("--baseline-emb", base_emb, "original top-1 embeddings");
  evaluate->add_option("--refined-emb", refined_emb, "re-ranked top-1 embeddings");

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "synthetic-judge simulation harness");
  pairrank::SimSpec spec;
  std::string sim_mode = "sequential", sim_policy = "ordered", sim_out;
  simulate->add_option("--k", spec.pool_size);
  simulate->add_option("--passes", spec.max_passes);
  simulate->add_option("--gamma", spec.gamma, "ability spacing (1.0 = exchangeable)");
  simulate->add_option("--seeds", spec.num_seeds);
  simulate->add_option("--seed", spec.base_seed);
  simulate->add_flag("--oracle", spec.oracle_judge, "zero-noise judge");
  add_mode_option(simulate, sim_mode);
  simulate->add_option("--cache-policy", sim_policy)
      ->check(CLI::IsMember({"ordered", "unordered"}));
  simulate->add_flag("!--no-early-stop", spec.early_stop);
  simulate->add_option("--out", sim_out, "write the report here instead of stdout");

  // ---- filter-frames ----
  auto* filter = app.add_subcommand("filter-frames", "drop near-duplicate frames");
  std::string features_path, filter_out;
  double threshold = 0.95;
  filter->add_option("--features", features_path)->required();
  filter->add_option("--threshold", threshold);
  filter->add_option("--out", filter_out, "output jsonl (default stdout)");

  // ---- normalize-annotations ----
  auto* normalize = app.add_subcommand("normalize-annotations",
                                       "run the tag post-processing chain");
  std::string norm_in, norm_out;
  std::string stopwords_path = data_file("stopwords.txt");
  std::string lexicon_path = data_file("pos_lexicon.txt");
  normalize->add_option("--in", norm_in)->required();
  normalize->add_option("--out", norm_out)->required();
  normalize->add_option("--stopwords", stopwords_path);
  normalize->add_option("--lexicon", lexicon_path);

  // ---- perturb-annotations ----
  auto* perturb = app.add_subcommand("perturb-annotations",
                                     "replace a fraction of tags with decoys");
  std::string pert_in, pert_out;
  std::string decoys_path = data_file("decoys.txt");
  double fraction = 0.2;
  std::uint64_t pert_seed = 1;
  perturb->add_option("--in", pert_in)->required();
  perturb->add_option("--out", pert_out)->required();
  perturb->add_option("--fraction", fraction);
  perturb->add_option("--seed", pert_seed);
  perturb->add_option("--decoys", decoys_path);

  // ---- report ----
  auto* report_cmd = app.add_subcommand("report", "print a saved run report");
  std::string report_in;
  report_cmd->add_option("--in", report_in, "path to report.json")->required();

  CLI11_PARSE(app, argc, argv);

  if (*rerank) {
    cfg.mode = parse_mode(mode);
    cfg.cache_policy = parse_policy(policy);
    cfg.judge_kind = judge == "oracle" ? pairrank::JudgeKind::kOracle
                     : judge == "llm" ? pairrank::JudgeKind::kLlm
                                      : pairrank::JudgeKind::kNoisyBt;
    if (cfg.judge_kind == pairrank::JudgeKind::kLlm) {
      const char* key = std::getenv("PAIRRANK_API_KEY");
      if (!key) key = std::getenv("OPENAI_API_KEY");
      if (key) cfg.llm.api_key = key;
    }
    auto corpus = pairrank::ingest(candidates, annotations, qrels_path, cfg.pool_size);
    auto report = pairrank::run(cfg, corpus);
    pairrank::write_run_artifacts(report, outdir);
    std::cout << pairrank::format_metrics_table(
        {{"baseline", report.baseline}, {"reranked", report.reranked}});
    if (report.failed_queries > 0) {
      std::cerr << report.failed_queries
                << " query(ies) failed; rerun with --fallback-coarse to accept "
                   "degraded output\n";
      return 3;
    }
    return 0;
  }

  if (*evaluate) {
    auto qrels = pairrank::load_qrels_file(ev_qrels);
    std::vector<std::pair<std::string, pairrank::MetricsReport>> rows;
    {
      // Baseline = the coarse order from the candidates file.
      std::vector<int> ranks;
      for (const auto& pool : pairrank::load_candidates_file(ev_candidates, ev_k)) {
        auto it = qrels.find(pool.query_id);
        if (it == qrels.end()) {
          throw ValidationError("no qrels for query " + pool.query_id);
        }
        std::vector<std::string> order;
        for (const auto& c : pool.candidates) order.push_back(c.video_id);
        for (const auto& id : pool.tail) order.push_back(id);
        ranks.push_back(pairrank::rank_of_truth(order, it->second));
      }
      rows.emplace_back("baseline", pairrank::compute_metrics(ranks));
    }
    if (!ev_rankings.empty()) {
      rows.emplace_back("rankings", metrics_for_rankings(
                                        load_rankings_file(ev_rankings), qrels));
    }
    if (!ev_rankings_b.empty()) {
      rows.emplace_back("rankings-b", metrics_for_rankings(
                                          load_rankings_file(ev_rankings_b), qrels));
    }
    std::cout << pairrank::format_metrics_table(rows);

    if (!expl_emb.empty() || !base_emb.empty() || !refined_emb.empty()) {
      if (expl_emb.empty() || base_emb.empty() || refined_emb.empty()) {
        throw ValidationError("faithfulness needs --expl-emb, --baseline-emb "
                              "and --refined-emb together");
      }
      auto expl = pairrank::load_vector_file(expl_emb);
      auto base = pairrank::load_vector_file(base_emb);
      auto refined = pairrank::load_vector_file(refined_emb);
      double sum_base = 0.0, sum_ref = 0.0;
      int n = 0;
      for (const auto& [id, e] : expl) {
        auto bi = base.find(id);
        auto ri = refined.find(id);
        if (bi == base.end() || ri == refined.end()) {
          throw ValidationError("faithfulness: missing embedding for id " + id);
        }
        auto f = pairrank::faithfulness_proxy(e, bi->second, ri->second);
        sum_base += f.sim_baseline;
        sum_ref += f.sim_refined;
        ++n;
      }
      if (n == 0) throw ValidationError("faithfulness: no ids in common");
      std::printf("faithfulness over %d queries: sim_baseline=%.4f "
                  "sim_refined=%.4f gain=%+.4f\n",
                  n, sum_base / n, sum_ref / n, (sum_ref - sum_base) / n);
    }
    return 0;
  }

  if (*simulate) {
    spec.mode = parse_mode(sim_mode);
    spec.cache_policy = parse_policy(sim_policy);
    const std::string out = pairrank::to_json(pairrank::run_simulation(spec));
    if (sim_out.empty()) {
      std::cout << out << '\n';
    } else {
      std::ofstream f(sim_out);
      f << out << '\n';
    }
    return 0;
  }

  if (*filter) {
    auto features = pairrank::load_frame_features(features_path);
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!filter_out.empty()) {
      file.open(filter_out);
      out = &file;
    }
    for (const auto& [video_id, frames] : features) {
      const auto retained = pairrank::filter_near_duplicates(frames, threshold);
      json rec;
      rec["video_id"] = video_id;
      rec["retained"] = json::array();
      for (int idx : retained) rec["retained"].push_back(frames[idx].frame_index);
      *out << rec.dump() << '\n';
    }
    return 0;
  }

  if (*normalize) {
    const auto stoplist = pairrank::load_stopwords(stopwords_path);
    const auto lexicon = pairrank::load_pos_lexicon(lexicon_path);
    auto raw = pairrank::load_annotations_file(norm_in);
    std::vector<pairrank::StructuredAnnotation> cleaned;
    cleaned.reserve(raw.size());
    for (const auto& ann : raw) {
      cleaned.push_back(pairrank::normalize_annotation(ann, stoplist, lexicon));
    }
    pairrank::write_annotations_file(norm_out, cleaned);
    std::cout << "normalized " << cleaned.size() << " annotations\n";
    return 0;
  }

  if (*perturb) {
    const auto decoys = pairrank::load_word_list(decoys_path);
    auto raw = pairrank::load_annotations_file(pert_in);
    std::vector<pairrank::StructuredAnnotation> noisy;
    noisy.reserve(raw.size());
    for (const auto& ann : raw) {
      noisy.push_back(pairrank::perturb_tags(ann, fraction, pert_seed, decoys));
    }
    pairrank::write_annotations_file(pert_out, noisy);
    std::cout << "perturbed " << noisy.size() << " annotations\n";
    return 0;
  }

  if (*report_cmd) {
    const auto report = pairrank::load_report(report_in);
    std::cout << "artifact " << report.artifact_version << ", "
              << report.queries.size() << " queries, " << report.failed_queries
              << " failed\n";
    std::cout << pairrank::format_metrics_table(
        {{"baseline", report.baseline}, {"reranked", report.reranked}});
    std::int64_t issued = 0, unique = 0, hits = 0;
    for (const auto& q : report.queries) {
      issued += q.stats.issued_comparisons;
      unique += q.stats.unique_calls;
      hits += q.stats.cache_hits;
    }
    std::printf("comparisons: issued=%lld unique=%lld cache_hits=%lld\n",
                static_cast<long long>(issued), static_cast<long long>(unique),
                static_cast<long long>(hits));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const pairrank::JudgeError& e) {
    std::cerr << "judge error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
