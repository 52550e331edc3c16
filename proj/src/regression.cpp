#include "volcast/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "volcast/log.hpp"

namespace volcast {

WlsFit fit_wls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
               const std::vector<std::string>& names, bool report) {
  if (x.rows() != y.size() || y.size() != w.size()) throw std::invalid_argument("fit_wls: size mismatch");
  if (x.rows() < x.cols()) throw std::invalid_argument("fit_wls: fewer rows than coefficients");
  if ((w.array() <= 0.0).any()) throw std::invalid_argument("fit_wls: weights must be positive");
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd a = sw.asDiagonal() * x;
  const Eigen::VectorXd b = sw.cwiseProduct(y);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  WlsFit fit;
  fit.beta = Eigen::VectorXd::Zero(x.cols());
  fit.dropped.assign(static_cast<std::size_t>(x.cols()), false);
  if (qr.rank() == x.cols()) {
    fit.beta = qr.solve(b);
  } else {
    std::vector<Eigen::Index> kept;
    for (Eigen::Index k = 0; k < qr.rank(); ++k) kept.push_back(qr.colsPermutation().indices()(k));
    std::sort(kept.begin(), kept.end());
    std::string dropped;
    for (Eigen::Index j = 0, k = 0; j < x.cols(); ++j) {
      if (k < static_cast<Eigen::Index>(kept.size()) && kept[static_cast<std::size_t>(k)] == j) {
        ++k;
        continue;
      }
      fit.dropped[static_cast<std::size_t>(j)] = true;
      dropped += (dropped.empty() ? "" : ", ") +
                 (j < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                              : "column " + std::to_string(j));
    }
    if (report) warn("collinear design, dropping " + dropped);
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(kept[k]);
    const Eigen::VectorXd beta = sub.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < kept.size(); ++k) fit.beta(kept[k]) = beta(static_cast<Eigen::Index>(k));
  }
  const Eigen::VectorXd e = y - x * fit.beta;
  fit.residual_variance = w.dot(e.cwiseAbs2()) / w.sum();
  return fit;
}

Eigen::VectorXd ridge_solve(const PenalizedProblem& p, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("ridge_solve: negative lambda");
  const auto k = p.gram.rows();
  if (k == 0) return {};
  const Eigen::MatrixXd a = p.gram + lambda * Eigen::MatrixXd::Identity(k, k);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  const double scale = std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 1e-12 * scale) return ldlt.solve(p.cross);
  return a.completeOrthogonalDecomposition().solve(p.cross);
}

namespace {

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double violation(double grad, double pen, double g) {
  if (g > 0.0) return std::abs(grad + pen);
  if (g < 0.0) return std::abs(grad - pen);
  return std::max(0.0, std::abs(grad) - pen);
}

}  // namespace

double kkt_residual(const PenalizedProblem& p, double lambda, const Eigen::VectorXd& penalty_weights,
                    const Eigen::VectorXd& g) {
  const Eigen::VectorXd grad = 2.0 * (p.gram * g - p.cross);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    worst = std::max(worst, violation(grad(k), lambda * penalty_weights(k), g(k)));
  }
  const double scale = p.cross.size() ? std::max(1.0, p.cross.cwiseAbs().maxCoeff()) : 1.0;
  return worst / scale;
}

Eigen::VectorXd weighted_lasso_solve(const PenalizedProblem& p, double lambda,
                                     const Eigen::VectorXd& penalty_weights, const Eigen::VectorXd& start,
                                     double tol, int max_sweeps) {
  const auto n = p.gram.rows();
  Eigen::VectorXd g = start.size() == n ? start : Eigen::VectorXd::Zero(n);
  if (n == 0) return g;
  Eigen::VectorXd q = p.gram * g;
  const double scale = std::max(1.0, p.cross.cwiseAbs().maxCoeff());
  const double diag_floor = 1e-12 * std::max(1.0, p.gram.diagonal().maxCoeff());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double gkk = p.gram(k, k);
      const double old = g(k);
      double next = 0.0;
      if (gkk > diag_floor) {
        const double rho = p.cross(k) - (q(k) - gkk * old);
        next = soft(rho, 0.5 * lambda * penalty_weights(k)) / gkk;
      }
      if (next != old) {
        q += p.gram.col(k) * (next - old);
        g(k) = next;
        moved = std::max(moved, std::abs(next - old));
      }
    }
    if (moved == 0.0) break;
    if (sweep % 4 == 3 || moved < 1e-10) {
      double worst = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (p.gram(k, k) <= diag_floor) continue;
        worst = std::max(worst, violation(2.0 * (q(k) - p.cross(k)), lambda * penalty_weights(k), g(k)));
      }
      if (worst / scale <= tol) break;
      // refresh the running product to keep rounding from accumulating
      q = p.gram * g;
    }
  }
  return g;
}

AdaptiveLasso::AdaptiveLasso(const Eigen::MatrixXd& z, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& w)
    : z_(z), x_(x), y_(y), w_(w) {
  if (z.rows() != y.size() || x.rows() != y.size() || w.size() != y.size()) {
    throw std::invalid_argument("AdaptiveLasso: size mismatch");
  }
  const Eigen::MatrixXd zw = z.transpose() * w.asDiagonal();
  zwz_inv_zw_ = (zw * z).colPivHouseholderQr().solve(zw);
  const Eigen::VectorXd yt = y - z * (zwz_inv_zw_ * y);
  const Eigen::MatrixXd xt = x - z * (zwz_inv_zw_ * x);
  const Eigen::MatrixXd xtw = xt.transpose() * w.asDiagonal();
  problem_.gram = xtw * xt;
  problem_.gram = 0.5 * (problem_.gram + problem_.gram.transpose()).eval();
  problem_.cross = xtw * yt;
}

AdaptiveLasso::Solution AdaptiveLasso::solve_stage2(const Eigen::VectorXd& ridge, double lambda_adap,
                                                    const Eigen::VectorXd& start) const {
  Solution s;
  s.penalty_weights = ridge.unaryExpr([](double g) {
    return g == 0.0 ? kMaxPenaltyWeight : std::min(1.0 / std::abs(g), kMaxPenaltyWeight);
  });
  s.candidates = weighted_lasso_solve(problem_, lambda_adap, s.penalty_weights, start);
  s.base = zwz_inv_zw_ * (y_ - x_ * s.candidates);
  const Eigen::VectorXd e = y_ - z_ * s.base - x_ * s.candidates;
  s.residual_variance = w_.dot(e.cwiseAbs2()) / w_.sum();
  return s;
}

AdaptiveLasso::Solution AdaptiveLasso::solve(double lambda_init, double lambda_adap) const {
  return solve_stage2(ridge_solve(problem_, lambda_init), lambda_adap);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_grid: bad arguments");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  out.back() = hi;
  return out;
}

}  // namespace volcast
