#include "pairrank/btagg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace pairrank {

PreferenceMatrix build_preference_matrix(const std::vector<std::string>& pool_ids,
                                         const ComparisonLog& log) {
  PreferenceMatrix pm;
  pm.ids = pool_ids;
  const auto k = static_cast<Eigen::Index>(pool_ids.size());
  pm.wins = Eigen::MatrixXd::Zero(k, k);

  std::unordered_map<std::string, Eigen::Index> index;
  index.reserve(pool_ids.size());
  for (Eigen::Index i = 0; i < k; ++i) index.emplace(pool_ids[i], i);

  for (const auto& rec : log) {
    if (rec.cached) continue;  // replays add no new edges
    const std::string& loser =
        rec.winner_id == rec.left_id ? rec.right_id : rec.left_id;
    auto wi = index.find(rec.winner_id);
    auto li = index.find(loser);
    if (wi == index.end() || li == index.end()) {
      throw std::invalid_argument("preference matrix: log entry references an id "
                                  "outside the pool: " + rec.winner_id);
    }
    pm.wins(wi->second, li->second) += 1.0;
  }
  return pm;
}

double bt_log_likelihood(const Eigen::MatrixXd& wins,
                         const Eigen::VectorXd& theta, double alpha) {
  const Eigen::Index k = theta.size();
  double ll = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (i == j) continue;
      const double w = wins(i, j) + alpha;
      ll += w * (std::log(theta(i)) - std::log(theta(i) + theta(j)));
    }
  }
  return ll;
}

double win_probability(double theta_i, double theta_j) {
  if (theta_i <= 0.0 || theta_j <= 0.0) {
    throw std::invalid_argument("win_probability: abilities must be positive");
  }
  return theta_i / (theta_i + theta_j);
}

AbilityVector fit_bt(const PreferenceMatrix& pm, const BtOptions& opt,
                     std::vector<double>* loglik_trace) {
  const Eigen::Index k = static_cast<Eigen::Index>(pm.ids.size());
  if (k < 2) {
    throw std::invalid_argument("fit_bt: need at least 2 candidates");
  }
  if (pm.wins.rows() != k || pm.wins.cols() != k) {
    throw std::invalid_argument("fit_bt: wins matrix shape does not match ids");
  }

  // Regularized counts; the diagonal never participates.
  Eigen::MatrixXd wp = pm.wins;
  wp.array() += opt.alpha;
  wp.diagonal().setZero();
  const Eigen::VectorXd total_wins = wp.rowwise().sum();       // W'_i
  const Eigen::MatrixXd pair_counts = wp + wp.transpose();     // n'_ij

  AbilityVector out;
  out.theta = Eigen::VectorXd::Ones(k);
  if (loglik_trace) loglik_trace->clear();

  Eigen::VectorXd next(k);
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    for (Eigen::Index i = 0; i < k; ++i) {
      double denom = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (j == i) continue;
        denom += pair_counts(i, j) / (out.theta(i) + out.theta(j));
      }
      next(i) = denom > 0.0 ? total_wins(i) / denom
                            : std::numeric_limits<double>::denorm_min();
    }
    const double mean = next.mean();
    next /= mean;
    next = next.cwiseMax(std::numeric_limits<double>::denorm_min());

    double delta = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      delta = std::max(delta, std::abs(std::log(next(i)) - std::log(out.theta(i))));
    }
    out.theta = next;
    out.iterations = iter + 1;
    if (loglik_trace) {
      loglik_trace->push_back(bt_log_likelihood(pm.wins, out.theta, opt.alpha));
    }
    if (delta < opt.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::vector<std::string> rank_by_ability(const std::vector<std::string>& ids,
                                         const Eigen::VectorXd& theta,
                                         const std::vector<int>& coarse_rank) {
  if (static_cast<std::size_t>(theta.size()) != ids.size() ||
      coarse_rank.size() != ids.size()) {
    throw std::invalid_argument("rank_by_ability: size mismatch");
  }
  std::vector<std::size_t> idx(ids.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double ta = theta(static_cast<Eigen::Index>(a));
    const double tb = theta(static_cast<Eigen::Index>(b));
    if (ta != tb) return ta > tb;
    return coarse_rank[a] < coarse_rank[b];
  });
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (std::size_t i : idx) out.push_back(ids[i]);
  return out;
}

}  // namespace pairrank
