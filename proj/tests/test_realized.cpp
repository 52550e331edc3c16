#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "volcast/distributions.hpp"
#include "volcast/realized.hpp"

using namespace volcast;

namespace {

const Date kDay = Date::parse("2020-01-02");

// Per-grid RV recomputed straight from prices.
double brute_grid_rv(const TradingDay& day, int step, int offset) {
  double s = 0.0;
  for (Eigen::Index i = offset; i + step < day.prices.size(); i += step) {
    const double r = std::log(day.prices(i + step) / day.prices(i));
    s += r * r;
  }
  return s * 100.0 * 100.0 * 252.0;
}

Eigen::VectorXd gaussian(std::mt19937_64& rng, int n, double sd) {
  std::normal_distribution<double> z(0.0, sd);
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) r(i) = z(rng);
  return r;
}

}  // namespace

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.99) == doctest::Approx(2.3263478740408408).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(normal_quantile(0.001) == doctest::Approx(-3.090232306167813).epsilon(1e-12));
  CHECK(normal_cdf(normal_quantile(0.2)) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("realized_variance") {
  CHECK(realized_variance(Eigen::VectorXd::Zero(10)) == 0.0);
  Eigen::VectorXd r(2);
  r << 0.01, -0.02;
  CHECK(realized_variance(r) == doctest::Approx((0.0001 + 0.0004) * 100 * 100 * 252).epsilon(1e-14));
  Eigen::VectorXd one(1);
  one << 0.003;
  CHECK(realized_variance(one) == doctest::Approx(0.003 * 0.003 * kAnnualization).epsilon(1e-14));
  CHECK_THROWS_AS(realized_variance(Eigen::VectorXd(0)), std::invalid_argument);
  // works on other scalar types and on expressions
  Eigen::VectorXf rf(2);
  rf << 0.01f, 0.01f;
  CHECK(realized_variance(rf) == doctest::Approx(0.0002 * kAnnualization).epsilon(1e-5));
  CHECK(realized_variance(r.head(1)) == doctest::Approx(0.0001 * kAnnualization));
}

TEST_CASE("grid_averaged_rv") {
  std::mt19937_64 rng(5);
  CHECK(grid_averaged_rv(testutil::make_day(kDay, Eigen::VectorXd::Constant(391, 10.0))) == 0.0);
  const auto day = testutil::random_day(rng, kDay);
  CHECK(grid_averaged_rv(day, 1) == doctest::Approx(realized_variance(intraday_returns(day, 1, 0))).epsilon(1e-14));
  double mean = 0.0;
  for (int k = 0; k < 5; ++k) mean += brute_grid_rv(day, 5, k) / 5.0;
  CHECK(std::abs(grid_averaged_rv(day, 5) - mean) <= 1e-12 * mean);
  CHECK_THROWS(grid_averaged_rv(testutil::make_day(kDay, Eigen::VectorXd::Constant(3, 1.0)), 5));
}

TEST_CASE("whole_day_rv") {
  CHECK(whole_day_rv(3.0, 4.0, {1.0, 1.0}) == 7.0);
  CHECK(whole_day_rv(0.0, 4.0, {0.3, 0.7}) == doctest::Approx(2.8));
  CHECK(whole_day_rv(3.0, 4.0, {0.0, 1.0}) == 4.0);
  CHECK_THROWS_AS(whole_day_rv(1.0, 1.0, {-0.1, 1.0}), std::invalid_argument);
}

TEST_CASE("estimate_on_in_weights") {
  std::mt19937_64 rng(9);
  std::lognormal_distribution<double> ln(0.0, 0.5);
  SUBCASE("identical series: weights sum to one so the mean matches the proxy") {
    std::vector<OnInObservation> h;
    for (int i = 0; i < 200; ++i) {
      const double x = ln(rng);
      h.push_back({x, x, x});
    }
    const auto [w1, w2] = estimate_on_in_weights(h);
    CHECK(w1 + w2 == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("noisy overnight part gets vanishing weight") {
    std::vector<OnInObservation> h;
    std::chi_squared_distribution<double> chi(1.0);
    for (int i = 0; i < 5000; ++i) {
      const double in = ln(rng);
      const double on = 0.2 * chi(rng) * chi(rng) * 50.0;  // heavy, uncorrelated
      h.push_back({on, in, on + in});
    }
    const auto [w1, w2] = estimate_on_in_weights(h);
    CHECK(w1 < 0.05);
    CHECK(w2 > 0.0);
  }
  SUBCASE("minimizer check against a brute-force scan over phi") {
    std::vector<OnInObservation> h;
    std::normal_distribution<double> z(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      const double common = ln(rng);
      const double on = 0.3 * common * std::exp(0.8 * z(rng));
      const double in = common * std::exp(0.2 * z(rng));
      h.push_back({on, in, on + in});
    }
    const auto [w1, w2] = estimate_on_in_weights(h);
    double mu0 = 0, mu1 = 0, mu2 = 0;
    for (const auto& o : h) mu0 += o.proxy / h.size(), mu1 += o.rv_on / h.size(), mu2 += o.rv_in / h.size();
    auto variance = [&](double phi) {
      double m = 0, s = 0;
      for (const auto& o : h) m += ((1 - phi) * mu0 / mu1 * o.rv_on + phi * mu0 / mu2 * o.rv_in) / h.size();
      for (const auto& o : h) {
        const double x = (1 - phi) * mu0 / mu1 * o.rv_on + phi * mu0 / mu2 * o.rv_in - m;
        s += x * x / h.size();
      }
      return s;
    };
    double best_phi = 0, best = 1e300;
    for (int i = 0; i <= 10000; ++i) {
      const double phi = i / 10000.0;
      if (variance(phi) < best) best = variance(phi), best_phi = phi;
    }
    CHECK(w2 * mu2 / mu0 == doctest::Approx(best_phi).epsilon(1e-3));
    CHECK(w1 * mu1 / mu0 == doctest::Approx(1 - best_phi).epsilon(1e-3));
  }
  SUBCASE("too short history") {
    std::vector<OnInObservation> h(10, {1.0, 1.0, 2.0});
    CHECK_THROWS_AS(estimate_on_in_weights(h), std::invalid_argument);
  }
  SUBCASE("zero variance falls back to unit weights") {
    testutil::CaptureWarnings w;
    std::vector<OnInObservation> h(80, {1.0, 2.0, 3.0});
    const auto weights = estimate_on_in_weights(h);
    CHECK(weights == std::pair{1.0, 1.0});
    CHECK(w.messages.size() == 1);
  }
}

TEST_CASE("med_rv and med_rq") {
  CHECK(med_rv(Eigen::VectorXd::Zero(20)) == 0.0);
  CHECK(med_rq(Eigen::VectorXd::Zero(20)) == 0.0);
  CHECK_THROWS(med_rv(Eigen::VectorXd::Zero(2)));
  SUBCASE("equal absolute returns") {
    const int n = 78;
    const double r = 0.002;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = (i % 3 == 0) ? -r : r;
    const double pi = std::numbers::pi;
    const double c = pi / (6.0 - 4.0 * std::sqrt(3.0) + pi);
    const double expected = c * (double(n) / (n - 2)) * (n - 2) * r * r * kAnnualization;
    CHECK(med_rv(v) == doctest::Approx(expected).epsilon(1e-13));
    const double cq = 3.0 * pi * n / (9.0 * pi + 72.0 - 52.0 * std::sqrt(3.0));
    CHECK(med_rq(v) == doctest::Approx(cq * (double(n) / (n - 2)) * (n - 2) * std::pow(r, 4) *
                                       kAnnualization * kAnnualization)
                           .epsilon(1e-13));
  }
  SUBCASE("median of a triple") {
    Eigen::VectorXd v(3);
    v << 0.05, -0.01, 0.03;  // med(|.|) = 0.03
    const double pi = std::numbers::pi;
    const double c = pi / (6.0 - 4.0 * std::sqrt(3.0) + pi);
    CHECK(med_rv(v) == doctest::Approx(c * 3.0 * 0.03 * 0.03 * kAnnualization).epsilon(1e-13));
  }
}

TEST_CASE("Monte Carlo: MedRV and RV agree without jumps") {
  std::mt19937_64 rng(2024);
  double sum_med = 0.0, sum_rv = 0.0;
  for (int day = 0; day < 2000; ++day) {
    const auto r = gaussian(rng, 78, 0.001);
    sum_med += med_rv(r);
    sum_rv += realized_variance(r);
  }
  const double ratio = sum_med / sum_rv;
  CHECK(ratio > 0.95);
  CHECK(ratio < 1.05);
}

TEST_CASE("jump_test") {
  CHECK(jump_test(5.0, 5.0, 30.0, 78) == 0.0);
  CHECK(jump_test(0.0, 1.0, 1.0, 78) == 0.0);
  CHECK(jump_test(1.0, 0.0, 1.0, 78) == 0.0);
  // medrq / medrv^2 <= 1 clamps the denominator at sqrt(0.96)
  CHECK(jump_test(10.0, 8.0, 32.0, 78) ==
        doctest::Approx(std::sqrt(78.0) * 0.2 / std::sqrt(0.96)).epsilon(1e-14));
  CHECK(jump_test(10.0, 8.0, 128.0, 78) ==
        doctest::Approx(std::sqrt(78.0) * 0.2 / std::sqrt(0.96 * 2.0)).epsilon(1e-14));
}

TEST_CASE("Monte Carlo: jump test size under a GBM null") {
  std::mt19937_64 rng(77);
  const double threshold = jump_threshold(0.01);
  int rejections = 0;
  const int days = 5000;
  for (int d = 0; d < days; ++d) {
    const auto r = gaussian(rng, 78, 0.0012);
    const double stat = jump_test(realized_variance(r), med_rv(r), med_rq(r), 78);
    rejections += stat > threshold;
  }
  const double rate = double(rejections) / days;
  CHECK(rate >= 0.002);
  CHECK(rate <= 0.03);
}

TEST_CASE("jump_split") {
  const double hi = jump_threshold(0.01) + 1.0;
  auto s = jump_split(10.0, 7.0, 0.5, 0.01);
  CHECK(s.jc == 0.0);
  CHECK(s.cc == 10.0);
  s = jump_split(5.0, 7.0, hi, 0.01);
  CHECK(s.jc == 0.0);
  CHECK(s.cc == 7.0);
  s = jump_split(10.0, 7.0, hi, 0.01);
  CHECK(s.jc == doctest::Approx(3.0));
  CHECK(s.cc == doctest::Approx(7.0));
  CHECK_THROWS(jump_split(1.0, 1.0, 0.0, 0.7));
}

TEST_CASE("semivariances") {
  Eigen::VectorXd up(3);
  up << 0.01, 0.02, 0.005;
  auto [p, n] = semivariances(up);
  CHECK(n == 0.0);
  CHECK(signed_jump(p, n) == doctest::Approx(realized_variance(up)));
  Eigen::VectorXd sym(2);
  sym << 0.01, -0.01;
  std::tie(p, n) = semivariances(sym);
  CHECK(p == n);
  CHECK(signed_jump(p, n) == 0.0);
  Eigen::VectorXd zero(1);
  zero << 0.0;
  std::tie(p, n) = semivariances(zero);
  CHECK(p == 0.0);
  CHECK(n == 0.0);
}

TEST_CASE("property: semivariance identities on random vectors") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> len(1, 400);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto r = gaussian(rng, len(rng), 0.002);
    const auto [p, n] = semivariances(r);
    const double rv = realized_variance(r);
    CHECK(std::abs(p + n - rv) <= 1e-12 * std::max(1.0, rv));
    CHECK(p >= 0.0);
    CHECK(n >= 0.0);
  }
}

TEST_CASE("realized_record on a simulated day") {
  std::mt19937_64 rng(8);
  const auto prev = testutil::random_day(rng, kDay);
  auto cur = testutil::random_day(rng, kDay + 1, 391, 0.001, prev.close() * 1.01);
  const auto rec = realized_record(prev, cur);
  CHECK(rec.rv_on == doctest::Approx(std::log(1.01) * std::log(1.01) * kAnnualization));
  CHECK(rec.rv == doctest::Approx(rec.rv_on + rec.rv_in));
  const double cc = std::log(cur.close() / prev.close());
  CHECK(rec.rv_cc == doctest::Approx(cc * cc * kAnnualization).epsilon(1e-12));
  CHECK(std::abs(rec.rs_pos + rec.rs_neg - rec.rv_in) <= 1e-12 * rec.rv_in);
  CHECK(std::abs(rec.sj - (rec.rs_pos - rec.rs_neg)) <= 1e-12 * rec.rv_in);
  CHECK(rec.n_returns == 78);
  CHECK(rec.jc >= 0.0);
  CHECK(rec.cc > 0.0);
  if (rec.jc == 0.0) {
    CHECK(rec.cc == rec.rv_in);
  } else {
    CHECK(rec.jc + rec.cc == doctest::Approx(rec.rv_in));
  }

  SUBCASE("a large intraday jump is detected and split off") {
    for (Eigen::Index i = 200; i < cur.prices.size(); ++i) cur.prices(i) *= 1.05;
    const auto jumped = realized_record(prev, cur);
    CHECK(jumped.jt_stat > jump_threshold(0.01));
    CHECK(jumped.jc > 0.0);
    CHECK(jumped.jc + jumped.cc == doctest::Approx(jumped.rv_in));
  }
}

TEST_CASE("realized CSV round trip") {
  testutil::TempDir dir("rm");
  std::mt19937_64 rng(4);
  IntradayPanel panel;
  panel.symbol = "Q";
  for (int i = 0; i < 4; ++i) panel.days.push_back(testutil::random_day(rng, kDay + i));
  const auto recs = realized_records(panel);
  REQUIRE(recs.size() == 3);
  write_realized(dir / "q.csv", recs);
  const auto back = read_realized(dir / "q.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[2].date == recs[2].date);
  CHECK(back[2].medrq == recs[2].medrq);
  CHECK(back[1].n_returns == 78);
}
