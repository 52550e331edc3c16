#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "volcast/errors.hpp"
#include "volcast/features.hpp"

using namespace volcast;

namespace {

std::vector<RealizedRecord> random_records(std::mt19937_64& rng, int n) {
  std::lognormal_distribution<double> ln(3.0, 0.6);
  std::normal_distribution<double> z(0.0, 1.0);
  std::bernoulli_distribution jump(0.1);
  std::vector<RealizedRecord> out;
  Date d = Date::parse("2019-01-01");
  for (int t = 0; t < n; ++t) {
    RealizedRecord r;
    r.date = d + t;
    r.rv_in = ln(rng);
    r.rv_on = 0.2 * ln(rng);
    r.rv_cc = r.rv_in + r.rv_on;
    r.jc = jump(rng) ? 0.3 * r.rv_in : 0.0;
    r.cc = r.rv_in - r.jc;
    r.rs_pos = r.rv_in * (0.5 + 0.1 * z(rng));
    r.rs_neg = r.rv_in - r.rs_pos;
    r.sj = r.rs_pos - r.rs_neg;
    out.push_back(r);
  }
  return out;
}

StockData random_stock(std::mt19937_64& rng, int n) {
  StockData s;
  s.symbol = "S";
  s.records = random_records(rng, n);
  s.extra_names = {"T", "TWN", "B_FOMC"};
  s.extra_is_dummy = {false, false, true};
  s.extra.resize(n, 3);
  std::poisson_distribution<int> pois(4.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < n; ++t) {
    s.extra(t, 0) = pois(rng);
    s.extra(t, 1) = u(rng);
    s.extra(t, 2) = t % 21 == 0 ? 1.0 : 0.0;
  }
  return s;
}

}  // namespace

TEST_CASE("log_transform") {
  CHECK(log_transform(0.0) == 0.0);
  CHECK(log_transform(1.0) == 0.0);
  CHECK(log_transform(std::numbers::e) == doctest::Approx(1.0));
  CHECK_THROWS_AS(log_transform(-1e-9), std::invalid_argument);
}

TEST_CASE("signed_jump_transform") {
  CHECK(signed_jump_transform(0.0) == 0.0);
  CHECK(signed_jump_transform(std::numbers::e) == doctest::Approx(1.0));
  CHECK(signed_jump_transform(-std::numbers::e) == doctest::Approx(-1.0));
  CHECK(signed_jump_transform(0.5) == doctest::Approx(-0.6931471805599453));
  CHECK(signed_jump_transform(-0.5) == doctest::Approx(0.6931471805599453));
}

TEST_CASE("horizon_average") {
  const std::vector<double> c(30, 7.0);
  for (int h : {1, 5, 22}) CHECK(horizon_average(c, h, 25) == doctest::Approx(std::log(7.0)));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  std::vector<double> s(100);
  for (auto& v : s) v = u(rng);
  for (std::size_t i = 21; i < s.size(); ++i) {
    CHECK(horizon_average(s, 1, i) == log_transform(s[i]));
    for (int h : {5, 22}) {
      double m = 0;
      for (int k = 0; k < h; ++k) m += s[i - static_cast<std::size_t>(k)];
      CHECK(horizon_average(s, h, i) == doctest::Approx(std::log(m / h)).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(horizon_average(s, 22, 20), std::out_of_range);
  CHECK(horizon_average(s, 22, 21) == horizon_average(s, 22, 21));
  const std::vector<double> sj{-2.0, 1.0};
  CHECK(horizon_average(sj, 2, 1, true) == doctest::Approx(-std::log(0.5)));
}

TEST_CASE("observation_weights") {
  CHECK(observation_weights(5, std::numeric_limits<double>::infinity()) == Eigen::VectorXd::Ones(5));
  const auto w = observation_weights(2, 1.0);
  CHECK(w(1) / w(0) == doctest::Approx(2.0));
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> n(1, 2000);
  std::uniform_real_distribution<double> hl(0.5, 1000.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int m = n(rng);
    const auto v = observation_weights(m, hl(rng));
    CHECK(v.sum() == doctest::Approx(m).epsilon(1e-12));
    CHECK(v.minCoeff() > 0.0);
  }
  CHECK_THROWS(observation_weights(0, 1.0));
  CHECK_THROWS(observation_weights(3, 0.0));
}

TEST_CASE("Standardizer") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z(3.0, 2.0);
  Eigen::MatrixXd x(200, 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = z(rng), x(i, 1) = 4.0, x(i, 2) = z(rng);
  testutil::CaptureWarnings w;
  const auto s = Standardizer::fit(x, {"a", "const", "b"});
  CHECK(w.messages.size() == 1);
  REQUIRE(s.kept() == std::vector<Eigen::Index>{0, 2});
  const Eigen::MatrixXd t = s.transform(x);
  for (Eigen::Index j = 0; j < 2; ++j) {
    CHECK(std::abs(t.col(j).mean()) < 1e-12);
    CHECK(std::sqrt(t.col(j).array().square().mean()) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // idempotent on the window
  const auto s2 = Standardizer::fit(t);
  CHECK((s2.transform(t) - t).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.transform_row(x.row(7)).isApprox(t.row(7)));
}

TEST_CASE("build_frame columns match brute-force recomputation") {
  std::mt19937_64 rng(21);
  const auto data = random_stock(rng, 120);
  const std::pair<double, double> w{0.7, 1.1};
  const auto f = build_frame(data, w, {1, 5});
  REQUIRE(f.rows() == 120 - kWarmup);
  CHECK(component_names().size() == 15);
  CHECK(f.x.cols() == 3 + 15 + 3 + 1);
  const auto& r = data.records;
  auto rv = [&](std::size_t t) { return w.first * r[t].rv_on + w.second * r[t].rv_in; };
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const auto t = static_cast<std::size_t>(i + kWarmup);
    CHECK(f.dates[static_cast<std::size_t>(i)] == r[t].date);
    CHECK(f.x(i, f.column("rv_d")) == doctest::Approx(std::log(rv(t))).epsilon(1e-13));
    double m = 0, sj = 0, rsn = 0;
    for (std::size_t k = t - 4; k <= t; ++k) m += rv(k) / 5, sj += r[k].sj / 5;
    for (std::size_t k = t - 21; k <= t; ++k) rsn += r[k].rs_neg / 22;
    CHECK(f.x(i, f.column("rv_w")) == doctest::Approx(std::log(m)).epsilon(1e-13));
    CHECK(f.x(i, f.column("sj_w")) == doctest::Approx(signed_jump_transform(sj)).epsilon(1e-12));
    CHECK(f.x(i, f.column("rsn_m")) == doctest::Approx(std::log(rsn)).epsilon(1e-13));
    CHECK(f.x(i, f.column("jc_d")) == log_transform(r[t].jc));
    CHECK(f.x(i, f.column("T")) == log_transform(data.extra(static_cast<Eigen::Index>(t), 0)));
    CHECK(f.x(i, f.column("B_FOMC")) == data.extra(static_cast<Eigen::Index>(t), 2));
    CHECK(f.x(i, f.column("rv_d*B_FOMC")) == f.x(i, 0) * data.extra(static_cast<Eigen::Index>(t), 2));
    if (t + 5 < r.size()) {
      double y = 0;
      for (std::size_t k = t + 1; k <= t + 5; ++k) y += rv(k) / 5;
      CHECK(f.target.at(5)(i) == doctest::Approx(std::log(y)).epsilon(1e-13));
      CHECK(f.realized.at(5)(i) == doctest::Approx(y).epsilon(1e-13));
    } else {
      CHECK(std::isnan(f.target.at(5)(i)));
    }
    if (t + 1 < r.size()) CHECK(f.target.at(1)(i) == doctest::Approx(std::log(rv(t + 1))).epsilon(1e-13));
  }
}

TEST_CASE("property: frame rows use no information after their date") {
  std::mt19937_64 rng(99);
  const auto base = random_stock(rng, 150);
  const auto f0 = build_frame(base, {0.9, 1.0}, {1, 5, 22});
  std::uniform_int_distribution<int> cut(kWarmup + 1, 149);
  for (int rep = 0; rep < 30; ++rep) {
    auto p = base;
    const auto c = static_cast<std::size_t>(cut(rng));
    for (std::size_t t = c; t < p.records.size(); ++t) {
      p.records[t].rv_in *= 3.0;
      p.records[t].sj = -p.records[t].sj;
      p.extra.row(static_cast<Eigen::Index>(t)) *= 2.0;
    }
    const auto f1 = build_frame(p, {0.9, 1.0}, {1, 5, 22});
    for (Eigen::Index i = 0; i + kWarmup < static_cast<Eigen::Index>(c); ++i) {
      CHECK((f1.x.row(i).array() == f0.x.row(i).array()).all());
      for (int h : {1, 5, 22}) {
        if (static_cast<std::size_t>(i + kWarmup + h) < c) CHECK(f1.target.at(h)(i) == f0.target.at(h)(i));
      }
    }
  }
}

TEST_CASE("build_frame rejects negative attention and short histories") {
  std::mt19937_64 rng(1);
  auto s = random_stock(rng, 40);
  CHECK(build_frame(random_stock(rng, 15), {1, 1}, {1}).rows() == 0);
  s.extra(30, 0) = -1.0;
  CHECK_THROWS_AS(build_frame(s, {1, 1}, {1}), DataError);
}

TEST_CASE("join_features and window_weights") {
  std::mt19937_64 rng(4);
  auto recs = random_records(rng, 80);
  std::vector<Date> dates;
  for (const auto& r : recs) dates.push_back(r.date);
  Eigen::MatrixXd v = Eigen::MatrixXd::Random(80, 1).cwiseAbs();
  const auto d = join_features("X", recs, dates, {"A"}, v, {false});
  CHECK(d.extra.col(0) == v.col(0));
  dates.erase(dates.begin() + 10);
  Eigen::MatrixXd v2 = v.topRows(79);
  CHECK_THROWS_AS(join_features("X", recs, dates, {"A"}, v2, {false}), DataError);

  const auto w = window_weights(recs, 10, 79);
  std::vector<OnInObservation> h;
  for (std::size_t t = 10; t < 80; ++t) h.push_back({recs[t].rv_on, recs[t].rv_in, recs[t].rv_cc});
  CHECK(w == estimate_on_in_weights(h));
  CHECK_THROWS(window_weights(recs, 10, 80));
}

TEST_CASE("frame dump and column manifest") {
  testutil::TempDir dir("fm");
  std::mt19937_64 rng(6);
  const auto f = build_frame(random_stock(rng, 40), {1, 1}, {1});
  write_frame(dir / "f.csv", f);
  write_column_manifest(dir / "cols.json", f);
  const auto text = testutil::read_file(dir / "cols.json");
  CHECK(text.find("\"rv_d*B_FOMC\"") != std::string::npos);
  CHECK(text.find("interaction") != std::string::npos);
  const auto csv = testutil::read_file(dir / "f.csv");
  CHECK(csv.rfind("date,rv_d,rv_w,rv_m,sj_d", 0) == 0);
}
