#include "volcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace volcast {

std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& differences) {
  std::vector<double> d;
  for (double x : differences) {
    if (!std::isfinite(x)) throw std::invalid_argument("wilcoxon_signed_rank: non-finite difference");
    if (x != 0.0) d.push_back(x);
  }
  WilcoxonResult out;
  out.n = d.size();
  if (d.empty()) return out;
  std::vector<double> mag(d.size());
  std::transform(d.begin(), d.end(), mag.begin(), [](double x) { return std::abs(x); });
  const auto rank = midranks(mag);
  // midranks are multiples of 1/2, so doubled ranks are integers
  std::vector<int> twice(d.size());
  int total = 0;
  int observed = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    twice[i] = static_cast<int>(std::lround(2.0 * rank[i]));
    total += twice[i];
    if (d[i] > 0.0) observed += twice[i];
  }
  out.statistic = 0.5 * observed;
  // null: each rank enters with probability 1/2
  std::vector<double> dist(static_cast<std::size_t>(total) + 1, 0.0);
  dist[0] = 1.0;
  int reach = 0;
  for (int r : twice) {
    for (int s = reach; s >= 0; --s) {
      const double p = dist[static_cast<std::size_t>(s)];
      dist[static_cast<std::size_t>(s)] = 0.5 * p;
      dist[static_cast<std::size_t>(s + r)] += 0.5 * p;
    }
    reach += r;
  }
  double tail = 0.0;
  for (int s = observed; s <= total; ++s) tail += dist[static_cast<std::size_t>(s)];
  out.p_value = std::min(1.0, tail);
  return out;
}

std::vector<double> holm_adjust(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double v = std::min(1.0, static_cast<double>(m - k) * p[order[k]]);
    running = std::max(running, v);
    adj[order[k]] = running;
  }
  return adj;
}

PairwiseMcs pairwise_mcs(const Eigen::VectorXd& loss_i, const Eigen::VectorXd& loss_j, double alpha,
                         int bootstrap, std::uint64_t seed, int block) {
  if (loss_i.size() != loss_j.size() || loss_i.size() < 2) {
    throw std::invalid_argument("pairwise_mcs: need two aligned series of length >= 2");
  }
  if (bootstrap < 1) throw std::invalid_argument("pairwise_mcs: bootstrap count must be positive");
  const Eigen::VectorXd d = loss_i - loss_j;
  const auto n = d.size();
  PairwiseMcs out;
  out.mean_diff = d.mean();
  if ((d.array() == d(0)).all() && d(0) == 0.0) return out;
  const int len = block > 0 ? block : static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n))));
  const auto l = std::min<Eigen::Index>(len, n);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> start(0, n - l);
  std::vector<double> centered(static_cast<std::size_t>(bootstrap));
  for (int b = 0; b < bootstrap; ++b) {
    double s = 0.0;
    Eigen::Index filled = 0;
    while (filled < n) {
      const Eigen::Index s0 = start(rng);
      const Eigen::Index take = std::min(l, n - filled);
      s += d.segment(s0, take).sum();
      filled += take;
    }
    centered[static_cast<std::size_t>(b)] = s / static_cast<double>(n) - out.mean_diff;
  }
  double var = 0.0;
  for (double c : centered) var += c * c;
  var /= bootstrap;
  if (!(var > 0.0)) {
    // no sampling variation: any nonzero mean is decisive
    out.t_stat = out.mean_diff == 0.0 ? 0.0 : std::copysign(INFINITY, out.mean_diff);
    out.p_value = out.mean_diff == 0.0 ? 1.0 : 1.0 / (bootstrap + 1.0);
  } else {
    const double se = std::sqrt(var);
    out.t_stat = out.mean_diff / se;
    int extreme = 0;
    for (double c : centered) extreme += std::abs(c / se) >= std::abs(out.t_stat);
    out.p_value = (1.0 + extreme) / (bootstrap + 1.0);
  }
  if (out.p_value < alpha) {
    if (out.mean_diff > 0.0) out.keep_i = false;
    if (out.mean_diff < 0.0) out.keep_j = false;
  }
  return out;
}

}  // namespace volcast
