#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace volcast {

/// Midranks (1-based) of the values; ties share the average rank.
std::vector<double> midranks(const std::vector<double>& values);

struct WilcoxonResult {
  std::size_t n = 0;         // nonzero differences used
  double statistic = 0.0;    // sum of ranks of positive differences
  double p_value = 1.0;      // one-sided, alternative: differences tend to be positive
};

/// One-sided exact Wilcoxon signed-rank test of H0: symmetric about zero
/// against a positive shift. Zero differences are dropped; tied absolute
/// differences get midranks and the null distribution is enumerated for
/// those ranks. All differences zero gives p = 1.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& differences);

/// Holm step-down adjustment; output in input order.
std::vector<double> holm_adjust(const std::vector<double>& p);

struct PairwiseMcs {
  double mean_diff = 0.0;  // mean of d = loss_i - loss_j
  double t_stat = 0.0;
  double p_value = 1.0;
  bool keep_i = true;
  bool keep_j = true;
};

/// Two-model confidence set. Tests E(d) = 0 with a moving-block bootstrap
/// (block length ceil(n^(1/3)) unless given) and drops the model with the
/// larger mean loss when p < alpha.
PairwiseMcs pairwise_mcs(const Eigen::VectorXd& loss_i, const Eigen::VectorXd& loss_j, double alpha,
                         int bootstrap, std::uint64_t seed, int block = 0);

}  // namespace volcast
