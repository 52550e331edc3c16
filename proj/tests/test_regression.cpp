#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "volcast/regression.hpp"

using namespace volcast;

namespace {

Eigen::MatrixXd gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

Eigen::VectorXd positive_weights(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = u(rng);
  return w;
}

// Full-problem reference: cyclic coordinate descent on
//   sum_i w_i (y_i - a_i' beta)^2 + lambda * sum_k p_k |beta_k|
// over all coefficients (p_k = 0 for the unpenalized block), stopped on the
// duality gap.
struct Reference {
  Eigen::VectorXd beta;
  double gap = 0.0;
};

Reference reference_lasso(const Eigen::MatrixXd& a_raw, const Eigen::VectorXd& y_raw, const Eigen::VectorXd& w,
                          const Eigen::VectorXd& pen, double lambda, int unpenalized, double target_gap) {
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd a = sw.asDiagonal() * a_raw;
  const Eigen::VectorXd b = sw.cwiseProduct(y_raw);
  const auto p = a.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = b;
  const Eigen::MatrixXd az = a.leftCols(unpenalized);
  const Eigen::MatrixXd proj = az * (az.transpose() * az).inverse() * az.transpose();
  Reference out;
  for (int sweep = 0; sweep < 1000000; ++sweep) {
    for (Eigen::Index k = 0; k < p; ++k) {
      const double nk = a.col(k).squaredNorm();
      const double rho = a.col(k).dot(r) + nk * beta(k);
      const double t = k < unpenalized ? 0.0 : 0.5 * lambda * pen(k - unpenalized);
      double next = 0.0;
      if (rho > t) next = (rho - t) / nk;
      if (rho < -t) next = (rho + t) / nk;
      r -= a.col(k) * (next - beta(k));
      beta(k) = next;
    }
    r = b - a * beta;
    const double primal = r.squaredNorm() + lambda * pen.dot(beta.tail(p - unpenalized).cwiseAbs());
    // dual point: residual made orthogonal to the free block, then scaled into the box
    Eigen::VectorXd theta = r - proj * r;
    double s = 1.0;
    for (Eigen::Index k = unpenalized; k < p; ++k) {
      const double c = std::abs(a.col(k).dot(theta));
      const double bound = 0.5 * lambda * pen(k - unpenalized);
      if (c > bound) s = std::min(s, bound / c);
    }
    theta *= s;
    const double dual = 2.0 * theta.dot(b) - theta.squaredNorm();
    out.gap = primal - dual;
    if (out.gap <= target_gap) break;
  }
  out.beta = beta;
  return out;
}

}  // namespace

TEST_CASE("WLS recovers an exact HAR to 1e-8") {
  std::mt19937_64 rng(1);
  const int n = 300;
  // HAR-style regressors from a positive series
  std::lognormal_distribution<double> ln(0.0, 0.5);
  std::vector<double> rv(n + 22);
  for (auto& v : rv) v = std::log(ln(rng) + 0.5);
  Eigen::MatrixXd x(n, 4);
  for (int t = 0; t < n; ++t) {
    const int i = t + 21;
    double w = 0.0, m = 0.0;
    for (int j = 0; j < 5; ++j) w += rv[static_cast<std::size_t>(i - j)];
    for (int j = 0; j < 22; ++j) m += rv[static_cast<std::size_t>(i - j)];
    x.row(t) << 1.0, rv[static_cast<std::size_t>(i)], w / 5.0, m / 22.0;
  }
  const Eigen::Vector4d truth(0.3, 0.4, 0.25, 0.2);
  const Eigen::VectorXd y = x * truth;
  const auto fit = fit_wls(x, y, positive_weights(rng, n));
  CHECK((fit.beta - truth).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fit.residual_variance < 1e-20);
}

TEST_CASE("WLS with equal weights is OLS and satisfies the normal equations") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 80;
    Eigen::MatrixXd x = gaussian(rng, n, 4);
    x.col(0).setOnes();
    const Eigen::VectorXd y = gaussian(rng, n, 1);
    const Eigen::VectorXd ones = Eigen::VectorXd::Constant(n, 3.0);
    const auto fit = fit_wls(x, y, ones);
    const Eigen::VectorXd ols = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    CHECK((fit.beta - ols).cwiseAbs().maxCoeff() < 1e-10);

    const Eigen::VectorXd w = positive_weights(rng, n);
    const auto wf = fit_wls(x, y, w);
    const Eigen::VectorXd e = y - x * wf.beta;
    CHECK((x.transpose() * w.cwiseProduct(e)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(wf.residual_variance == doctest::Approx(w.dot(e.cwiseAbs2()) / w.sum()).epsilon(1e-12));
  }
}

TEST_CASE("WLS drops all-zero interaction columns and reduces to HAR") {
  std::mt19937_64 rng(3);
  const int n = 120;
  Eigen::MatrixXd har = gaussian(rng, n, 4);
  har.col(0).setOnes();
  Eigen::MatrixXd harm(n, 6);
  harm << har, Eigen::MatrixXd::Zero(n, 2);
  const Eigen::VectorXd y = gaussian(rng, n, 1);
  const Eigen::VectorXd w = positive_weights(rng, n);
  testutil::CaptureWarnings warnings;
  const auto full = fit_wls(harm, y, w, {"const", "rv_d", "rv_w", "rv_m", "rv_d*B_FOMC", "rv_d*B_CPI"});
  const auto base = fit_wls(har, y, w);
  CHECK(full.dropped == std::vector<bool>{false, false, false, false, true, true});
  CHECK((full.beta.head(4) - base.beta).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(full.beta.tail(2).isZero());
  REQUIRE(warnings.messages.size() == 1);
  CHECK(warnings.messages[0].find("rv_d*B_FOMC") != std::string::npos);
}

TEST_CASE("WLS rejects bad input") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
  CHECK_THROWS(fit_wls(x, y, Eigen::VectorXd::Ones(2)));
  CHECK_THROWS(fit_wls(x, y, Eigen::VectorXd::Zero(3)));
  CHECK_THROWS(fit_wls(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)));
}

TEST_CASE("ridge solve matches the closed form") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = gaussian(rng, 50, 5);
  PenalizedProblem p{x.transpose() * x, x.transpose() * gaussian(rng, 50, 1)};
  const Eigen::VectorXd g = ridge_solve(p, 3.0);
  CHECK(((p.gram + 3.0 * Eigen::MatrixXd::Identity(5, 5)) * g - p.cross).norm() < 1e-10);
  CHECK_THROWS(ridge_solve(p, -1.0));
}

TEST_CASE("adaptive LASSO with zero penalties equals WLS") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 200;
    Eigen::MatrixXd z = gaussian(rng, n, 3);
    z.col(0).setOnes();
    const Eigen::MatrixXd x = gaussian(rng, n, 5);
    Eigen::VectorXd y = z * Eigen::Vector3d(0.1, 0.5, 0.3) + x.col(1) * 0.4 + 0.5 * gaussian(rng, n, 1);
    const Eigen::VectorXd w = positive_weights(rng, n);
    Eigen::MatrixXd full(n, 8);
    full << z, x;
    const auto wls = fit_wls(full, y, w);
    const auto sol = AdaptiveLasso(z, x, y, w).solve(0.0, 0.0);
    CHECK((sol.base - wls.beta.head(3)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((sol.candidates - wls.beta.tail(5)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(sol.residual_variance == doctest::Approx(wls.residual_variance).epsilon(1e-9));
  }
}

TEST_CASE("adaptive LASSO with a huge penalty keeps only the base block") {
  std::mt19937_64 rng(6);
  const int n = 150;
  Eigen::MatrixXd z = gaussian(rng, n, 3);
  z.col(0).setOnes();
  const Eigen::MatrixXd x = gaussian(rng, n, 4);
  const Eigen::VectorXd y = z.col(1) + x.col(0) + 0.1 * gaussian(rng, n, 1);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  const auto sol = AdaptiveLasso(z, x, y, w).solve(1.0, 1e12);
  CHECK(sol.candidates.isZero());
  const auto har = fit_wls(z, y, w);
  CHECK((sol.base - har.beta).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero ridge coefficient gets the capped penalty weight") {
  std::mt19937_64 rng(7);
  const int n = 60;
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(n, 1);
  const Eigen::MatrixXd x = gaussian(rng, n, 2);
  const AdaptiveLasso lasso(z, x, gaussian(rng, n, 1), Eigen::VectorXd::Ones(n));
  const auto sol = lasso.solve_stage2(Eigen::Vector2d(0.0, 0.5), 0.1);
  CHECK(sol.penalty_weights(0) == AdaptiveLasso::kMaxPenaltyWeight);
  CHECK(sol.penalty_weights(1) == doctest::Approx(2.0));
  CHECK(sol.candidates(0) == 0.0);
}

TEST_CASE("adaptive LASSO matches a full-problem coordinate-descent reference") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int zeros = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 200;
    Eigen::MatrixXd z = gaussian(rng, n, 3);
    z.col(0).setOnes();
    Eigen::MatrixXd x = gaussian(rng, n, 5);
    x.col(2) += 0.6 * x.col(1);  // some correlation
    Eigen::VectorXd beta(5);
    for (int k = 0; k < 5; ++k) beta(k) = u(rng) < 0.5 ? 0.0 : 2.0 * u(rng) - 1.0;
    const Eigen::VectorXd y = z * Eigen::Vector3d(0.2, 0.5, 0.3) + x * beta + gaussian(rng, n, 1);
    const Eigen::VectorXd w = positive_weights(rng, n);
    const AdaptiveLasso lasso(z, x, y, w);
    const double lambda_init = 200.0 * u(rng);

    // stage-one reference: ridge on the full normal equations, base block unpenalized
    Eigen::MatrixXd a(n, 8);
    a << z, x;
    Eigen::MatrixXd g = a.transpose() * w.asDiagonal() * a;
    g.bottomRightCorner(5, 5) += lambda_init * Eigen::MatrixXd::Identity(5, 5);
    const Eigen::VectorXd ridge_full = g.ldlt().solve(a.transpose() * w.cwiseProduct(y));
    const Eigen::VectorXd ridge = ridge_full.tail(5);
    CHECK((ridge - ridge_solve(lasso.problem(), lambda_init)).cwiseAbs().maxCoeff() < 1e-9);

    const Eigen::VectorXd pen = ridge.cwiseAbs().cwiseInverse();
    double lambda_max = 0.0;
    for (int k = 0; k < 5; ++k) lambda_max = std::max(lambda_max, 2.0 * std::abs(lasso.problem().cross(k)) / pen(k));
    const double lambda = lambda_max * (0.02 + 0.8 * u(rng));

    const auto sol = lasso.solve_stage2(ridge, lambda);
    const auto ref = reference_lasso(a, y, w, pen, lambda, 3, 1e-10);
    REQUIRE(ref.gap <= 1e-10);
    CHECK((sol.base - ref.beta.head(3)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((sol.candidates - ref.beta.tail(5)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(kkt_residual(lasso.problem(), lambda, pen, sol.candidates) <= 1e-8);
    zeros += static_cast<int>((sol.candidates.array() == 0.0).count());
  }
  CHECK(zeros > 0);  // the grid of lambdas exercises the sparse regime
}

TEST_CASE("coordinate descent warm start and KKT residual") {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd x = gaussian(rng, 100, 6);
  PenalizedProblem p{x.transpose() * x, x.transpose() * gaussian(rng, 100, 1)};
  const Eigen::VectorXd pen = Eigen::VectorXd::Ones(6);
  const Eigen::VectorXd cold = weighted_lasso_solve(p, 5.0, pen);
  const Eigen::VectorXd warm = weighted_lasso_solve(p, 5.0, pen, Eigen::VectorXd::Constant(6, 3.0));
  CHECK((cold - warm).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(kkt_residual(p, 5.0, pen, cold) <= 1e-8);
  // a perturbed point violates the conditions
  Eigen::VectorXd off = cold;
  off(0) += 0.1;
  CHECK(kkt_residual(p, 5.0, pen, off) > 1e-3);
}

TEST_CASE("log grid") {
  const auto g = log_grid(1e-4, 1e2, 20);
  REQUIRE(g.size() == 20);
  CHECK(g.front() == doctest::Approx(1e-4));
  CHECK(g.back() == 1e2);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(1e6, 1.0 / 19)));
  CHECK(log_grid(3.0, 5.0, 1) == std::vector<double>{3.0});
  CHECK_THROWS(log_grid(0.0, 1.0, 3));
}
