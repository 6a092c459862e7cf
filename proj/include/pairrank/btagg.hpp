#ifndef PAIRRANK_BTAGG_HPP
#define PAIRRANK_BTAGG_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "pairrank/ranker.hpp"

namespace pairrank {

// Win/loss counts between pool candidates. wins(i, j) = number of unique
// judgments where ids[i] beat ids[j]; zero diagonal; cached replays are
// excluded because they carry no new information.
struct PreferenceMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd wins;
};

PreferenceMatrix build_preference_matrix(const std::vector<std::string>& pool_ids,
                                         const ComparisonLog& log);

struct BtOptions {
  double alpha = 1e-3;  // symmetric pseudo-count added to every ordered pair
  double tol = 1e-8;    // stop when max_i |delta log theta_i| < tol
  int max_iter = 1000;
};

// Ability scores, normalized to mean 1 (only ratios are identified).
struct AbilityVector {
  Eigen::VectorXd theta;
  int iterations = 0;
  bool converged = false;
};

// Maximum-likelihood Bradley-Terry fit via the minorization-maximization
// update
//
//   theta_i <- W'_i / sum_{j != i} n'_ij / (theta_i + theta_j)
//
// on the regularized counts w'_ij = w_ij + alpha, with W'_i = sum_j w'_ij
// and n'_ij = w'_ij + w'_ji. The pseudo-counts connect the comparison
// graph, so the regularized log-likelihood has a unique maximizer (up to
// scale) and each update increases it. Non-convergence within max_iter is
// reported through the flag, not an error.
//
// If loglik_trace is non-null it receives the regularized log-likelihood
// after every update.
AbilityVector fit_bt(const PreferenceMatrix& pm, const BtOptions& opt = {},
                     std::vector<double>* loglik_trace = nullptr);

// sum_{i != j} w'_ij * (log theta_i - log(theta_i + theta_j))
double bt_log_likelihood(const Eigen::MatrixXd& wins,
                         const Eigen::VectorXd& theta, double alpha);

// P[i beats j] = theta_i / (theta_i + theta_j).
double win_probability(double theta_i, double theta_j);

// Stable descending sort on theta; exact ties broken by ascending coarse
// rank. coarse_rank[i] is the embedding-model rank of ids[i].
std::vector<std::string> rank_by_ability(const std::vector<std::string>& ids,
                                         const Eigen::VectorXd& theta,
                                         const std::vector<int>& coarse_rank);

}  // namespace pairrank

#endif  // PAIRRANK_BTAGG_HPP
