#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "volcast/date.hpp"
#include "volcast/market_data.hpp"

namespace volcast {

/// Squared log returns are reported in annualized percent-squared units.
inline constexpr double kAnnualization = 100.0 * 100.0 * 252.0;

template <typename Derived>
typename Derived::Scalar realized_variance(const Eigen::MatrixBase<Derived>& returns) {
  using Scalar = typename Derived::Scalar;
  if (returns.size() == 0) throw std::invalid_argument("realized_variance: empty return vector");
  return returns.squaredNorm() * Scalar(kAnnualization);
}

/// Positive and nonpositive realized semivariances (zero returns count as
/// negative), annualized.
template <typename Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar> semivariances(
    const Eigen::MatrixBase<Derived>& returns) {
  using Scalar = typename Derived::Scalar;
  if (returns.size() == 0) throw std::invalid_argument("semivariances: empty return vector");
  Scalar pos(0), neg(0);
  for (Eigen::Index j = 0; j < returns.size(); ++j) {
    const Scalar r = returns(j);
    (r > Scalar(0) ? pos : neg) += r * r;
  }
  return {pos * Scalar(kAnnualization), neg * Scalar(kAnnualization)};
}

template <typename Scalar>
Scalar signed_jump(Scalar rs_pos, Scalar rs_neg) {
  return rs_pos - rs_neg;
}

namespace detail {

// Sum over j of med(|r_{j-1}|, |r_j|, |r_{j+1}|)^power.
template <typename Derived>
typename Derived::Scalar median_triple_sum(const Eigen::MatrixBase<Derived>& r, int power) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  Scalar sum(0);
  for (Eigen::Index j = 1; j + 1 < r.size(); ++j) {
    const Scalar a = abs(r(j - 1)), b = abs(r(j)), c = abs(r(j + 1));
    const Scalar med = std::max(std::min(a, b), std::min(std::max(a, b), c));
    Scalar p(1);
    for (int k = 0; k < power; ++k) p *= med;
    sum += p;
  }
  return sum;
}

}  // namespace detail

/// Median realized variance (jump robust), annualized.
template <typename Derived>
typename Derived::Scalar med_rv(const Eigen::MatrixBase<Derived>& returns) {
  using Scalar = typename Derived::Scalar;
  const auto n = returns.size();
  if (n < 3) throw std::invalid_argument("med_rv: need at least 3 returns");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar c = pi / (Scalar(6) - Scalar(4) * std::sqrt(Scalar(3)) + pi);
  const Scalar nn = Scalar(n);
  return c * (nn / (nn - Scalar(2))) * detail::median_triple_sum(returns, 2) *
         Scalar(kAnnualization);
}

/// Median realized quarticity. Scaled by kAnnualization^2 so that
/// med_rq / med_rv^2 is unit free.
template <typename Derived>
typename Derived::Scalar med_rq(const Eigen::MatrixBase<Derived>& returns) {
  using Scalar = typename Derived::Scalar;
  const auto n = returns.size();
  if (n < 3) throw std::invalid_argument("med_rq: need at least 3 returns");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar nn = Scalar(n);
  const Scalar c =
      Scalar(3) * pi * nn / (Scalar(9) * pi + Scalar(72) - Scalar(52) * std::sqrt(Scalar(3)));
  return c * (nn / (nn - Scalar(2))) * detail::median_triple_sum(returns, 4) *
         Scalar(kAnnualization) * Scalar(kAnnualization);
}

/// Ratio jump statistic comparing RV with MedRV. Returns 0 when either
/// variance is zero.
double jump_test(double rv_in, double medrv, double medrq, int n);

/// Standard normal quantile used as the jump threshold.
double jump_threshold(double alpha);

struct JumpSplit {
  double jc = 0.0;
  double cc = 0.0;
};

/// Jump and continuous components given the statistic and test level.
JumpSplit jump_split(double rv_in, double medrv, double jt_stat, double alpha);

double whole_day_rv(double rv_on, double rv_in, std::pair<double, double> weights);

struct OnInObservation {
  double rv_on = 0.0;
  double rv_in = 0.0;
  double proxy = 0.0;
};

/// Variance-minimizing overnight/intraday weights. Requires >= 60 rows.
/// Falls back to (1, 1) with a warning on a degenerate history.
std::pair<double, double> estimate_on_in_weights(const std::vector<OnInObservation>& history);

/// Per-grid measures averaged over the `step` offset grids of one day.
struct GridMeasures {
  double rv = 0.0;
  double rs_pos = 0.0;
  double rs_neg = 0.0;
  double medrv = 0.0;
  double medrq = 0.0;
  int n_returns = 0;  // return count of the offset-0 grid
};

GridMeasures grid_measures(const TradingDay& day, int step = 5);

/// Mean over offsets of realized_variance on each subsampled grid.
double grid_averaged_rv(const TradingDay& day, int step = 5);

struct RealizedRecord {
  Date date;
  double rv_in = 0.0;
  double rv_on = 0.0;
  double rv = 0.0;
  double rv_cc = 0.0;  // squared close-to-close return, the weighting proxy
  double medrv = 0.0;
  double medrq = 0.0;
  double jt_stat = 0.0;
  double jc = 0.0;
  double cc = 0.0;
  double rs_pos = 0.0;
  double rs_neg = 0.0;
  double sj = 0.0;
  int n_returns = 0;
};

struct RealizedOptions {
  int step = 5;
  double jump_alpha = 0.01;
  std::pair<double, double> weights{1.0, 1.0};
};

RealizedRecord realized_record(const TradingDay& prev, const TradingDay& cur,
                               const RealizedOptions& options = {});

/// One record per day after the first (which has no overnight return).
std::vector<RealizedRecord> realized_records(const IntradayPanel& panel,
                                             const RealizedOptions& options = {});

/// Recomputes `rv` from rv_on/rv_in with the given weights.
void apply_weights(std::vector<RealizedRecord>& records, std::pair<double, double> weights);

void write_realized(const std::filesystem::path& path, const std::vector<RealizedRecord>& records);
std::vector<RealizedRecord> read_realized(const std::filesystem::path& path);

}  // namespace volcast
