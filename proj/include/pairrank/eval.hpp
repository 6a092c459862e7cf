#ifndef PAIRRANK_EVAL_HPP
#define PAIRRANK_EVAL_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pairrank/types.hpp"

namespace pairrank {

// query id -> relevant video ids (the benchmarks have exactly one each).
using Qrels = std::map<std::string, std::set<std::string>>;

struct MetricsReport {
  double r_at_1 = 0.0;  // percentages
  double r_at_5 = 0.0;
  double r_at_10 = 0.0;
  double mdr = 0.0;  // median rank, lower-median convention for even counts
  double mnr = 0.0;  // mean rank
  int n_queries = 0;
};

// Minimum 1-based position of any relevant id; throws ValidationError if
// none appears in the ranking.
int rank_of_truth(const std::vector<std::string>& full_ranking,
                  const std::set<std::string>& relevant);

MetricsReport compute_metrics(const std::vector<int>& ranks);

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct FaithfulnessResult {
  double sim_baseline = 0.0;  // cos(explanation, original top-1 embedding)
  double sim_refined = 0.0;   // cos(explanation, re-ranked top-1 embedding)
  double gain = 0.0;          // sim_refined - sim_baseline
};

FaithfulnessResult faithfulness_proxy(const Eigen::VectorXd& explanation_emb,
                                      const Eigen::VectorXd& original_top1_emb,
                                      const Eigen::VectorXd& refined_top1_emb);

// Kendall rank correlation between two orderings of the same id set,
// in [-1, 1]; 1 means identical order.
double kendall_tau(const std::vector<std::string>& order,
                   const std::vector<std::string>& truth);

// Synthetic-judge simulation harness: per seed, scramble a pool with
// known geometric abilities, sweep-rerank it with the simulated judge,
// refit abilities from the unique comparison edges, and score window,
// refit, and single-guess orders against the truth.
struct SimSpec {
  int pool_size = 20;   // K
  int max_passes = 10;  // P
  double gamma = 1.3;   // adjacent ability ratio; 1.0 = indistinguishable pool
  bool oracle_judge = false;  // zero-noise limit
  int num_seeds = 200;
  std::uint64_t base_seed = 1;
  CacheKeyPolicy cache_policy = CacheKeyPolicy::kOrdered;
  SweepMode mode = SweepMode::kSequential;
  bool early_stop = true;
  double alpha = 1e-3;
};

struct SimReport {
  double tau_window_mean = 0.0;
  double tau_window_std = 0.0;
  double tau_bt_mean = 0.0;
  double tau_bt_std = 0.0;
  // Listwise ablation: one seeded random restart plus a single insertion
  // pass of noisy judgments.
  double tau_guess_mean = 0.0;
  double tau_guess_std = 0.0;
  double r_at_1 = 0.0;  // fraction of seeds placing the true best first after refit
  double mean_unique_calls = 0.0;
  double unique_call_fraction = 0.0;  // of the max_passes * (K-1) budget
  int num_seeds = 0;
};

SimReport run_simulation(const SimSpec& spec);

std::string to_json(const SimReport& report);

}  // namespace pairrank

#endif  // PAIRRANK_EVAL_HPP
