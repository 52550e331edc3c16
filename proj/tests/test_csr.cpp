#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "volcast/csr.hpp"

using namespace volcast;

namespace {

struct Partition {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<int> labels;  // cluster id per input value, ascending by centroid
  std::vector<double> centroids;
};

// Brute force over every assignment of values to k labels (k^n), keeping
// the least-squares optimum. Only feasible for small n.
Partition brute_force_kmeans(const std::vector<double>& v, int k) {
  const int n = static_cast<int>(v.size());
  Partition best;
  std::vector<int> lab(static_cast<std::size_t>(n), 0);
  while (true) {
    std::vector<double> s(static_cast<std::size_t>(k), 0.0);
    std::vector<int> c(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      s[static_cast<std::size_t>(lab[static_cast<std::size_t>(i)])] += v[static_cast<std::size_t>(i)];
      ++c[static_cast<std::size_t>(lab[static_cast<std::size_t>(i)])];
    }
    if (std::all_of(c.begin(), c.end(), [](int x) { return x > 0; })) {
      double cost = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto l = static_cast<std::size_t>(lab[static_cast<std::size_t>(i)]);
        cost += std::pow(v[static_cast<std::size_t>(i)] - s[l] / c[l], 2);
      }
      if (cost < best.cost - 1e-12) {
        best.cost = cost;
        std::vector<int> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
          return s[static_cast<std::size_t>(a)] / c[static_cast<std::size_t>(a)] <
                 s[static_cast<std::size_t>(b)] / c[static_cast<std::size_t>(b)];
        });
        std::vector<int> rank(static_cast<std::size_t>(k));
        for (int r = 0; r < k; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
        best.labels.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) best.labels[static_cast<std::size_t>(i)] = rank[static_cast<std::size_t>(lab[static_cast<std::size_t>(i)])];
        best.centroids.resize(static_cast<std::size_t>(k));
        for (int r = 0; r < k; ++r) {
          const auto l = static_cast<std::size_t>(order[static_cast<std::size_t>(r)]);
          best.centroids[static_cast<std::size_t>(r)] = s[l] / c[l];
        }
      }
    }
    int i = 0;
    while (i < n && ++lab[static_cast<std::size_t>(i)] == k) lab[static_cast<std::size_t>(i++)] = 0;
    if (i == n) break;
  }
  return best;
}

// Exhaustive search over the contiguous partitions of the sorted values;
// usable for larger n.
Partition contiguous_kmeans(const std::vector<double>& v, int k) {
  const int n = static_cast<int>(v.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return v[static_cast<std::size_t>(a)] < v[static_cast<std::size_t>(b)]; });
  Partition best;
  std::vector<int> cuts(static_cast<std::size_t>(k - 1));
  std::iota(cuts.begin(), cuts.end(), 1);
  while (true) {
    std::vector<int> bounds{0};
    bounds.insert(bounds.end(), cuts.begin(), cuts.end());
    bounds.push_back(n);
    double cost = 0.0;
    std::vector<double> cent;
    for (int c = 0; c < k; ++c) {
      double m = 0.0;
      for (int q = bounds[static_cast<std::size_t>(c)]; q < bounds[static_cast<std::size_t>(c) + 1]; ++q) m += v[static_cast<std::size_t>(order[static_cast<std::size_t>(q)])];
      m /= bounds[static_cast<std::size_t>(c) + 1] - bounds[static_cast<std::size_t>(c)];
      for (int q = bounds[static_cast<std::size_t>(c)]; q < bounds[static_cast<std::size_t>(c) + 1]; ++q) cost += std::pow(v[static_cast<std::size_t>(order[static_cast<std::size_t>(q)])] - m, 2);
      cent.push_back(m);
    }
    if (cost < best.cost - 1e-12) {
      best.cost = cost;
      best.centroids = cent;
      best.labels.assign(static_cast<std::size_t>(n), 0);
      for (int c = 0; c < k; ++c)
        for (int q = bounds[static_cast<std::size_t>(c)]; q < bounds[static_cast<std::size_t>(c) + 1]; ++q) best.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(q)])] = c;
    }
    int i = k - 2;
    while (i >= 0 && cuts[static_cast<std::size_t>(i)] == n - (k - 1 - i)) --i;
    if (i < 0) break;
    ++cuts[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k - 1; ++j) cuts[static_cast<std::size_t>(j)] = cuts[static_cast<std::size_t>(j) - 1] + 1;
  }
  return best;
}

double oracle_trimmed(std::vector<double> f) {
  std::sort(f.begin(), f.end());
  const std::size_t n = f.size();
  const std::size_t drop = n < 4 ? 0 : n / 4;
  double s = 0.0;
  for (std::size_t i = drop; i < n - drop; ++i) s += f[i];
  return s / static_cast<double>(n - 2 * drop);
}

}  // namespace

TEST_CASE("subset enumeration") {
  CHECK(binomial(30, 2) == 435);
  CHECK(binomial(15, 2) == 105);
  CHECK(enumerate_subsets(30, 2).size() == 435);
  CHECK(enumerate_subsets(2, 2).size() == 1);
  CHECK(enumerate_subsets(5, 2).size() == 10);
  CHECK(enumerate_subsets(6, 3).size() == binomial(6, 3));
  const auto s = enumerate_subsets(4, 2);
  CHECK(s.front() == std::vector<int>{0, 1});
  CHECK(s.back() == std::vector<int>{2, 3});
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK_THROWS(enumerate_subsets(1, 2));

  const auto models = enumerate_csr_models({"rv_d", "rv_w"}, {"a", "b", "c"});
  REQUIRE(models.size() == 3);
  CHECK(models[1] == std::vector<std::string>{"rv_d", "rv_w", "a", "c"});
}

TEST_CASE("DMSE weights") {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(500);
  const Eigen::VectorXd twos = Eigen::VectorXd::Constant(500, 2.0);
  CHECK(dmse_weight(ones) / dmse_weight(twos) == doctest::Approx(4.0).epsilon(1e-14));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd e(40);
  for (auto& v : e) v = z(rng);
  CHECK(dmse_weight(e, 1.0) == doctest::Approx(1.0 / e.squaredNorm() * 40).epsilon(1e-13));
  CHECK(dmse_weight(e) == dmse_weight(Eigen::VectorXd(e)));

  // most recent error undiscounted, oldest discounted by delta^(S-1)
  const Eigen::Vector3d hist(1.0, 0.0, 0.0);
  CHECK(dmse_weight(hist, 0.5) == doctest::Approx(3.0 / 0.25));
  const Eigen::Vector3d recent(0.0, 0.0, 1.0);
  CHECK(dmse_weight(recent, 0.5) == doctest::Approx(3.0));
  CHECK(dmse_weight(Eigen::VectorXd::Zero(5)) == 1e12);
  CHECK_THROWS(dmse_weight(Eigen::VectorXd()));
}

TEST_CASE("1-D k-means is optimal against full enumeration") {
  std::mt19937_64 rng(2);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 5 + rep % 4;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = ln(rng);
    const auto bf = brute_force_kmeans(v, 5);
    const auto dp = kmeans_1d(Eigen::Map<Eigen::VectorXd>(v.data(), n), 5);
    CHECK(dp.cost == doctest::Approx(bf.cost).epsilon(1e-10));
    CHECK(dp.labels == bf.labels);
  }
}

TEST_CASE("csr_combine matches the exhaustive clustering oracle on 100 configurations") {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> size(5, 24);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = size(rng);
    std::vector<double> w(static_cast<std::size_t>(n));
    Eigen::VectorXd f(n);
    for (auto& x : w) x = ln(rng);
    for (int i = 0; i < n; ++i) f(i) = z(rng);
    const auto oracle = contiguous_kmeans(w, 5);
    std::vector<double> members;
    std::vector<int> selected;
    for (int i = 0; i < n; ++i) {
      if (oracle.labels[static_cast<std::size_t>(i)] == 4) {
        members.push_back(f(i));
        selected.push_back(i);
      }
    }
    const auto got = csr_combine(f, Eigen::Map<Eigen::VectorXd>(w.data(), n));
    CHECK(got.selected == selected);
    CHECK(got.forecast == doctest::Approx(oracle_trimmed(members)).epsilon(1e-13));
    CHECK(got.forecast >= *std::min_element(members.begin(), members.end()));
    CHECK(got.forecast <= *std::max_element(members.begin(), members.end()));
  }
}

TEST_CASE("csr_combine with a dominant group") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd w(20), f(20);
  for (int i = 0; i < 20; ++i) {
    w(i) = i < 5 ? 100.0 : 1.0 + 0.5 * u(rng);
    f(i) = u(rng);
  }
  const auto c = csr_combine(f, w);
  CHECK(c.selected == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(c.forecast == doctest::Approx(oracle_trimmed({f(0), f(1), f(2), f(3), f(4)})));
}

TEST_CASE("csr_combine fallbacks") {
  // fewer submodels than clusters: everything kept, trimmed mean of all
  const Eigen::VectorXd f4 = Eigen::Vector4d(1.0, 2.0, 3.0, 10.0);
  const auto all = csr_combine(f4, Eigen::Vector4d(1.0, 2.0, 3.0, 4.0));
  CHECK(all.selected.size() == 4);
  CHECK(all.forecast == doctest::Approx(2.5));
  CHECK(csr_combine(Eigen::VectorXd::Constant(1, 0.7), Eigen::VectorXd::Ones(1)).forecast == 0.7);

  // top cluster with 3 members: plain mean
  Eigen::VectorXd w(8), f(8);
  w << 1, 2, 4, 8, 16, 100, 100.5, 101;
  f << 0, 0, 0, 0, 0, 1, 2, 6;
  const auto c = csr_combine(f, w);
  CHECK(c.selected == std::vector<int>{5, 6, 7});
  CHECK(c.forecast == doctest::Approx(3.0));

  CHECK(csr_combine(Eigen::VectorXd::Constant(12, -1.25), Eigen::VectorXd::LinSpaced(12, 1, 12)).forecast == -1.25);
  CHECK_THROWS(csr_combine(Eigen::VectorXd(), Eigen::VectorXd()));
}

TEST_CASE("trimmed mean") {
  CHECK(trimmed_mean({1, 2, 3, 4, 100, -50, 7, 8}) == doctest::Approx((2 + 3 + 4 + 7) / 4.0));
  CHECK(trimmed_mean({5, 1, 9}) == doctest::Approx(5.0));
  CHECK(trimmed_mean({1, 2, 3, 4, 5}) == doctest::Approx(3.0));  // floor(1.25) = 1 per tail
  CHECK_THROWS(trimmed_mean({}));
}
