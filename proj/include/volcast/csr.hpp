#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace volcast {

std::uint64_t binomial(int n, int k);

/// All k-subsets of {0, ..., p-1} in lexicographic order.
std::vector<std::vector<int>> enumerate_subsets(int p, int k);

/// Feature lists base + each k-subset of the candidates.
std::vector<std::vector<std::string>> enumerate_csr_models(const std::vector<std::string>& base,
                                                           const std::vector<std::string>& candidates,
                                                           int k = 2);

/// Discounted-MSE weight [S^-1 sum delta^(S-j) e_j^2]^-1 for errors ordered
/// oldest first. Capped at 1e12 when the discounted error is zero.
template <class Derived>
double dmse_weight(const Eigen::MatrixBase<Derived>& errors, double delta = 0.95) {
  using std::pow;
  const auto s = errors.size();
  if (s < 1) throw std::invalid_argument("dmse_weight: no errors");
  double acc = 0.0;
  double discount = 1.0;
  for (auto j = s - 1; j >= 0; --j) {
    acc += discount * static_cast<double>(errors(j)) * static_cast<double>(errors(j));
    discount *= delta;
  }
  acc /= static_cast<double>(s);
  constexpr double cap = 1e12;
  return acc > 1.0 / cap ? 1.0 / acc : cap;
}

/// Globally optimal 1-D k-means (least squares) by dynamic programming.
/// Cluster ids are ordered by increasing centroid.
struct Clustering {
  std::vector<int> labels;
  std::vector<double> centroids;
  double cost = 0.0;
};
Clustering kmeans_1d(const Eigen::VectorXd& values, int k);

/// Mean after dropping floor(n * trim) values from each end. Values with
/// n < 4 fall back to the plain mean.
double trimmed_mean(std::vector<double> values, double trim = 0.25);

struct CsrCombination {
  double forecast = 0.0;
  std::vector<int> selected;  // submodel indices in the preferred cluster
};

/// Clusters the DMSE weights into `clusters` groups, keeps the group with
/// the largest centroid and returns the 25% trimmed mean of its forecasts
/// (plain mean below 4 members). With fewer submodels than clusters all
/// submodels are kept.
CsrCombination csr_combine(const Eigen::VectorXd& forecasts, const Eigen::VectorXd& weights,
                           int clusters = 5, double trim = 0.25);

}  // namespace volcast
