#include "pairrank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "pairrank/btagg.hpp"
#include "pairrank/judge.hpp"
#include "pairrank/ranker.hpp"
#include "pairrank/rng.hpp"

namespace pairrank {

int rank_of_truth(const std::vector<std::string>& full_ranking,
                  const std::set<std::string>& relevant) {
  for (std::size_t i = 0; i < full_ranking.size(); ++i) {
    if (relevant.count(full_ranking[i]) > 0) return static_cast<int>(i) + 1;
  }
  throw ValidationError("rank_of_truth: no relevant id appears in the ranking");
}

MetricsReport compute_metrics(const std::vector<int>& ranks) {
  if (ranks.empty()) {
    throw std::invalid_argument("compute_metrics: empty rank list");
  }
  MetricsReport m;
  m.n_queries = static_cast<int>(ranks.size());
  std::int64_t r1 = 0, r5 = 0, r10 = 0, sum = 0;
  for (int r : ranks) {
    if (r < 1) throw std::invalid_argument("compute_metrics: ranks are 1-based");
    if (r <= 1) ++r1;
    if (r <= 5) ++r5;
    if (r <= 10) ++r10;
    sum += r;
  }
  const double n = static_cast<double>(ranks.size());
  m.r_at_1 = 100.0 * static_cast<double>(r1) / n;
  m.r_at_5 = 100.0 * static_cast<double>(r5) / n;
  m.r_at_10 = 100.0 * static_cast<double>(r10) / n;
  std::vector<int> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  // Lower median: for even n this is the smaller of the two middles.
  m.mdr = static_cast<double>(sorted[(sorted.size() - 1) / 2]);
  m.mnr = static_cast<double>(sum) / n;
  return m;
}

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine: dimension mismatch");
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw std::invalid_argument("cosine: zero vector");
  }
  return u.dot(v) / (nu * nv);
}

FaithfulnessResult faithfulness_proxy(const Eigen::VectorXd& explanation_emb,
                                      const Eigen::VectorXd& original_top1_emb,
                                      const Eigen::VectorXd& refined_top1_emb) {
  FaithfulnessResult r;
  r.sim_baseline = cosine(explanation_emb, original_top1_emb);
  r.sim_refined = cosine(explanation_emb, refined_top1_emb);
  r.gain = r.sim_refined - r.sim_baseline;
  return r;
}

double kendall_tau(const std::vector<std::string>& order,
                   const std::vector<std::string>& truth) {
  const std::size_t n = order.size();
  if (n != truth.size() || n < 2) {
    throw std::invalid_argument("kendall_tau: orderings must match and have >= 2 items");
  }
  std::unordered_map<std::string, std::size_t> pos;
  pos.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pos.emplace(truth[i], i);
  std::int64_t discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto pi = pos.find(order[i]);
    if (pi == pos.end()) throw std::invalid_argument("kendall_tau: id sets differ");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (pi->second > pos.at(order[j])) ++discordant;
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return 1.0 - 2.0 * static_cast<double>(discordant) / pairs;
}

namespace {

struct SeedOutcome {
  double tau_window = 0.0;
  double tau_bt = 0.0;
  double tau_guess = 0.0;
  double top1_hit = 0.0;
  double unique_calls = 0.0;
};

double mean_of(const std::vector<SeedOutcome>& v, double SeedOutcome::*field) {
  double s = 0.0;
  for (const auto& o : v) s += o.*field;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<SeedOutcome>& v, double SeedOutcome::*field,
              double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (const auto& o : v) {
    const double d = o.*field - mean;
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// The "single noisy listwise guess": a seeded random restart followed by
// one insertion pass, each element judged once against the current tail.
std::vector<std::string> single_guess_order(const std::vector<CandidateRef>& pool,
                                            const std::string& query_id, Judge& judge,
                                            std::mt19937_64& gen) {
  std::vector<CandidateRef> shuffled = pool;
  shuffle_deterministic(shuffled, gen);
  std::vector<CandidateRef> out;
  out.reserve(shuffled.size());
  out.push_back(shuffled[0]);
  for (std::size_t i = 1; i < shuffled.size(); ++i) {
    PairQuery pq;
    pq.query_id = query_id;
    pq.query_text = "synthetic";
    pq.left = shuffled[i];
    pq.right = out.back();
    const Judgment j = judge.compare(pq);
    if (j.winner == Side::kLeft) {
      out.insert(out.end() - 1, shuffled[i]);
    } else {
      out.push_back(shuffled[i]);
    }
  }
  std::vector<std::string> ids;
  ids.reserve(out.size());
  for (const auto& c : out) ids.push_back(c.video_id);
  return ids;
}

SeedOutcome run_one_seed(const SimSpec& spec, int seed_index) {
  const int k = spec.pool_size;
  std::vector<std::string> truth;
  truth.reserve(static_cast<std::size_t>(k));
  std::unordered_map<std::string, double> theta_true;
  for (int i = 0; i < k; ++i) {
    std::string id = "v" + std::to_string(i);
    theta_true[id] = std::pow(spec.gamma, static_cast<double>(k - i));
    truth.push_back(std::move(id));
  }

  std::mt19937_64 gen(derive_stream(spec.base_seed,
                                    {"sim", std::to_string(seed_index)}));
  std::vector<CandidateRef> pool;
  pool.reserve(truth.size());
  for (const auto& id : truth) pool.push_back({id, "synthetic annotation " + id});
  shuffle_deterministic(pool, gen);

  OracleJudge oracle(truth);
  NoisyBtJudge noisy(theta_true,
                     derive_stream(spec.base_seed, {"judge", std::to_string(seed_index)}));
  Judge& inner = spec.oracle_judge ? static_cast<Judge&>(oracle)
                                   : static_cast<Judge&>(noisy);
  CachedJudge cached(inner, spec.cache_policy);

  SweepConfig cfg;
  cfg.max_passes = spec.max_passes;
  cfg.mode = spec.mode;
  cfg.early_stop = spec.early_stop;
  const std::string qid = "sim" + std::to_string(seed_index);
  const SweepResult sweep = sweep_rerank(qid, "synthetic", pool, cached, cfg);

  std::vector<std::string> pool_ids;
  std::vector<int> coarse_rank;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    pool_ids.push_back(pool[i].video_id);
    coarse_rank.push_back(static_cast<int>(i) + 1);
  }
  const PreferenceMatrix pm = build_preference_matrix(pool_ids, sweep.log);
  BtOptions bt_opt;
  bt_opt.alpha = spec.alpha;
  const AbilityVector ability = fit_bt(pm, bt_opt);
  const auto bt_order = rank_by_ability(pool_ids, ability.theta, coarse_rank);

  SeedOutcome out;
  out.tau_window = kendall_tau(sweep.window_order, truth);
  out.tau_bt = kendall_tau(bt_order, truth);
  out.top1_hit = bt_order.front() == truth.front() ? 1.0 : 0.0;
  out.unique_calls = static_cast<double>(cached.stats().unique_calls);
  out.tau_guess = kendall_tau(
      single_guess_order(pool, qid + "-guess", inner, gen), truth);
  return out;
}

}  // namespace

SimReport run_simulation(const SimSpec& spec) {
  if (spec.pool_size < 2 || spec.max_passes < 1 || spec.num_seeds < 1) {
    throw std::invalid_argument("run_simulation: invalid spec");
  }
  if (spec.gamma < 1.0) {
    throw std::invalid_argument("run_simulation: gamma must be >= 1");
  }
  std::vector<SeedOutcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(spec.num_seeds));
  for (int s = 0; s < spec.num_seeds; ++s) {
    outcomes.push_back(run_one_seed(spec, s));
  }

  SimReport r;
  r.num_seeds = spec.num_seeds;
  r.tau_window_mean = mean_of(outcomes, &SeedOutcome::tau_window);
  r.tau_window_std = std_of(outcomes, &SeedOutcome::tau_window, r.tau_window_mean);
  r.tau_bt_mean = mean_of(outcomes, &SeedOutcome::tau_bt);
  r.tau_bt_std = std_of(outcomes, &SeedOutcome::tau_bt, r.tau_bt_mean);
  r.tau_guess_mean = mean_of(outcomes, &SeedOutcome::tau_guess);
  r.tau_guess_std = std_of(outcomes, &SeedOutcome::tau_guess, r.tau_guess_mean);
  r.r_at_1 = mean_of(outcomes, &SeedOutcome::top1_hit);
  r.mean_unique_calls = mean_of(outcomes, &SeedOutcome::unique_calls);
  r.unique_call_fraction =
      r.mean_unique_calls /
      (static_cast<double>(spec.max_passes) * static_cast<double>(spec.pool_size - 1));
  return r;
}

std::string to_json(const SimReport& report) {
  nlohmann::ordered_json j;
  j["num_seeds"] = report.num_seeds;
  j["tau_window_mean"] = report.tau_window_mean;
  j["tau_window_std"] = report.tau_window_std;
  j["tau_bt_mean"] = report.tau_bt_mean;
  j["tau_bt_std"] = report.tau_bt_std;
  j["tau_guess_mean"] = report.tau_guess_mean;
  j["tau_guess_std"] = report.tau_guess_std;
  j["r_at_1"] = report.r_at_1;
  j["mean_unique_calls"] = report.mean_unique_calls;
  j["unique_call_fraction"] = report.unique_call_fraction;
  return j.dump(2);
}

}  // namespace pairrank
