#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace volcast {

/// Weighted least squares result. Coefficients of dropped (collinear)
/// columns are zero.
struct WlsFit {
  Eigen::VectorXd beta;
  std::vector<bool> dropped;
  double residual_variance = 0.0;  // sum w e^2 / sum w
};

/// Weighted least squares of y on x with observation weights w. When the
/// design is rank deficient, the columns left out by the pivoted QR are
/// dropped with a warning (naming them when `names` is given) and the fit
/// is redone on the rest. `report` = false silences the warning.
WlsFit fit_wls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
               const std::vector<std::string>& names = {}, bool report = true);

/// Sum-of-squares problem in Gram form after the unpenalized block has
/// been profiled out: minimize g'Gg - 2c'g + lambda * sum(p_k |g_k|).
struct PenalizedProblem {
  Eigen::MatrixXd gram;  // X~' W X~
  Eigen::VectorXd cross; // X~' W y~
};

/// Ridge stage: (G + lambda I)^-1 c.
Eigen::VectorXd ridge_solve(const PenalizedProblem& p, double lambda);

/// Coordinate descent for the weighted L1 problem, warm-started from
/// `start` when it has the right size. Stops when the scaled KKT residual
/// falls below `tol`.
Eigen::VectorXd weighted_lasso_solve(const PenalizedProblem& p, double lambda,
                                     const Eigen::VectorXd& penalty_weights,
                                     const Eigen::VectorXd& start = {}, double tol = 1e-12,
                                     int max_sweeps = 200000);

/// Largest violation of the subgradient conditions, divided by
/// max(1, max|c|).
double kkt_residual(const PenalizedProblem& p, double lambda, const Eigen::VectorXd& penalty_weights,
                    const Eigen::VectorXd& g);

/// Adaptive LASSO with an unpenalized block z (intercept included by the
/// caller) and standardized candidates x.
class AdaptiveLasso {
 public:
  /// Prepares the profiled Gram problem; independent of the lambdas.
  AdaptiveLasso(const Eigen::MatrixXd& z, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                const Eigen::VectorXd& w);

  struct Solution {
    Eigen::VectorXd base;        // coefficients on z
    Eigen::VectorXd candidates;  // coefficients on x
    Eigen::VectorXd penalty_weights;
    double residual_variance = 0.0;
  };

  /// Both stages for one (lambda_init, lambda_adap) pair.
  [[nodiscard]] Solution solve(double lambda_init, double lambda_adap) const;
  /// Stage two only, given ridge coefficients and an optional warm start.
  [[nodiscard]] Solution solve_stage2(const Eigen::VectorXd& ridge, double lambda_adap,
                                      const Eigen::VectorXd& start = {}) const;

  [[nodiscard]] const PenalizedProblem& problem() const { return problem_; }

  static constexpr double kMaxPenaltyWeight = 1e8;

 private:
  Eigen::MatrixXd z_, x_;
  Eigen::VectorXd y_, w_;
  Eigen::MatrixXd zwz_inv_zw_;  // (Z'WZ)^-1 Z'W
  PenalizedProblem problem_;
};

/// Log-spaced grid of `n` values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace volcast
