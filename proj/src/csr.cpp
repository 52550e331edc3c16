#include "volcast/csr.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace volcast {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

std::vector<std::vector<int>> enumerate_subsets(int p, int k) {
  if (k < 1 || k > p) throw std::invalid_argument("enumerate_subsets: need 1 <= k <= p");
  std::vector<std::vector<int>> out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == p - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

std::vector<std::vector<std::string>> enumerate_csr_models(const std::vector<std::string>& base,
                                                           const std::vector<std::string>& candidates,
                                                           int k) {
  std::vector<std::vector<std::string>> out;
  for (const auto& subset : enumerate_subsets(static_cast<int>(candidates.size()), k)) {
    auto features = base;
    for (int i : subset) features.push_back(candidates[static_cast<std::size_t>(i)]);
    out.push_back(std::move(features));
  }
  return out;
}

Clustering kmeans_1d(const Eigen::VectorXd& values, int k) {
  const auto n = static_cast<int>(values.size());
  if (n == 0 || k < 1) throw std::invalid_argument("kmeans_1d: empty input or k < 1");
  k = std::min(k, n);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values(a) < values(b); });
  std::vector<double> s1(static_cast<std::size_t>(n) + 1, 0.0), s2 = s1;
  for (int i = 0; i < n; ++i) {
    const double v = values(order[static_cast<std::size_t>(i)]);
    s1[static_cast<std::size_t>(i) + 1] = s1[static_cast<std::size_t>(i)] + v;
    s2[static_cast<std::size_t>(i) + 1] = s2[static_cast<std::size_t>(i)] + v * v;
  }
  // within-cluster sum of squares of sorted positions [i, j]
  auto sse = [&](int i, int j) {
    const double m = j - i + 1;
    const double a = s1[static_cast<std::size_t>(j) + 1] - s1[static_cast<std::size_t>(i)];
    const double b = s2[static_cast<std::size_t>(j) + 1] - s2[static_cast<std::size_t>(i)];
    return std::max(0.0, b - a * a / m);
  };
  const double inf = std::numeric_limits<double>::infinity();
  // cost[c][j]: best cost of the first j+1 values in c+1 clusters; start[c][j]: first index of last cluster
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(n), inf));
  std::vector<std::vector<int>> start(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(n), 0));
  for (int j = 0; j < n; ++j) cost[0][static_cast<std::size_t>(j)] = sse(0, j);
  for (int c = 1; c < k; ++c) {
    auto& row = cost[static_cast<std::size_t>(c)];
    const auto& prev = cost[static_cast<std::size_t>(c) - 1];
    for (int j = c; j < n; ++j) {
      for (int i = c; i <= j; ++i) {
        const double v = prev[static_cast<std::size_t>(i) - 1] + sse(i, j);
        if (v < row[static_cast<std::size_t>(j)]) {
          row[static_cast<std::size_t>(j)] = v;
          start[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = i;
        }
      }
    }
  }
  Clustering out;
  out.labels.assign(static_cast<std::size_t>(n), 0);
  out.centroids.assign(static_cast<std::size_t>(k), 0.0);
  out.cost = cost[static_cast<std::size_t>(k) - 1][static_cast<std::size_t>(n) - 1];
  int j = n - 1;
  for (int c = k - 1; c >= 0; --c) {
    const int i = c == 0 ? 0 : start[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
    for (int q = i; q <= j; ++q) out.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(q)])] = c;
    out.centroids[static_cast<std::size_t>(c)] =
        (s1[static_cast<std::size_t>(j) + 1] - s1[static_cast<std::size_t>(i)]) / (j - i + 1);
    j = i - 1;
  }
  return out;
}

double trimmed_mean(std::vector<double> values, double trim) {
  if (values.empty()) throw std::invalid_argument("trimmed_mean: no values");
  if (!(trim >= 0.0 && trim < 0.5)) throw std::invalid_argument("trimmed_mean: trim must lie in [0, 0.5)");
  std::size_t lo = 0;
  if (values.size() >= 4) {
    std::sort(values.begin(), values.end());
    lo = static_cast<std::size_t>(static_cast<double>(values.size()) * trim);
  }
  double s = 0.0;
  for (std::size_t i = lo; i < values.size() - lo; ++i) s += values[i];
  return s / static_cast<double>(values.size() - 2 * lo);
}

CsrCombination csr_combine(const Eigen::VectorXd& forecasts, const Eigen::VectorXd& weights, int clusters,
                           double trim) {
  if (forecasts.size() == 0 || forecasts.size() != weights.size()) {
    throw std::invalid_argument("csr_combine: need matching, nonempty forecasts and weights");
  }
  CsrCombination out;
  if (forecasts.size() < clusters) {
    out.selected.resize(static_cast<std::size_t>(forecasts.size()));
    std::iota(out.selected.begin(), out.selected.end(), 0);
  } else {
    const Clustering c = kmeans_1d(weights, clusters);
    const int best = static_cast<int>(c.centroids.size()) - 1;
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
      if (c.labels[i] == best) out.selected.push_back(static_cast<int>(i));
    }
  }
  std::vector<double> f;
  f.reserve(out.selected.size());
  for (int i : out.selected) f.push_back(forecasts(i));
  out.forecast = trimmed_mean(std::move(f), trim);
  return out;
}

}  // namespace volcast
