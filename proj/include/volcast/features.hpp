#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "volcast/date.hpp"
#include "volcast/realized.hpp"

namespace volcast {

/// ln(x) for x > 0 and ln(1 + x) = 0 at zero. Throws on negative input.
double log_transform(double x);

/// ln(sj) for sj > 0, 0 at zero, -ln|sj| for sj < 0.
double signed_jump_transform(double sj);

/// Log of the raw-scale mean of series[index - horizon + 1 .. index]. Uses
/// signed_jump_transform when `signed_jump` is set. Throws
/// std::out_of_range with insufficient history.
double horizon_average(std::span<const double> series, int horizon, std::size_t index,
                       bool signed_jump = false);

/// Exponentially declining weights exp(-ln2 (n - t) / half_life), t = 1..n,
/// scaled to sum to n. An infinite half-life gives equal weights.
Eigen::VectorXd observation_weights(int n, double half_life);

/// Column standardization fitted on an estimation window. Columns with zero
/// spread are dropped.
class Standardizer {
 public:
  Standardizer() = default;

  /// `names` is only used for the warning about dropped columns.
  static Standardizer fit(const Eigen::MatrixXd& x, const std::vector<std::string>& names = {},
                          bool report = true);

  [[nodiscard]] Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
  [[nodiscard]] Eigen::RowVectorXd transform_row(const Eigen::RowVectorXd& x) const;

  /// Indices (into the fitted matrix) of the retained columns.
  [[nodiscard]] const std::vector<Eigen::Index>& kept() const { return kept_; }
  [[nodiscard]] const Eigen::RowVectorXd& mean() const { return mean_; }
  [[nodiscard]] const Eigen::RowVectorXd& sd() const { return sd_; }

 private:
  std::vector<Eigen::Index> kept_;
  Eigen::RowVectorXd mean_;  // of kept columns
  Eigen::RowVectorXd sd_;
};

/// Days of history consumed before the first model row (monthly average).
inline constexpr int kWarmup = 21;

/// Raw per-stock inputs: realized records plus the feature-table values on
/// the same dates.
struct StockData {
  std::string symbol;
  std::vector<RealizedRecord> records;
  std::vector<std::string> extra_names;
  std::vector<bool> extra_is_dummy;  // dummies are not log-transformed
  Eigen::MatrixXd extra;             // records x extra_names
};

/// Model-ready rows for one stock and one set of overnight weights. Row i
/// holds features dated `dates[i]`; targets look h days ahead.
struct FeatureFrame {
  std::vector<Date> dates;
  std::vector<std::string> names;
  std::vector<std::string> sources;  // per column, for the column manifest
  Eigen::MatrixXd x;
  std::map<int, Eigen::VectorXd> target;    // log of mean whole-day RV over t+1..t+h, NaN if unknown
  std::map<int, Eigen::VectorXd> realized;  // the same on the raw scale

  [[nodiscard]] Eigen::Index rows() const { return x.rows(); }
  /// Throws DataError for an unknown name.
  [[nodiscard]] Eigen::Index column(const std::string& name) const;
  [[nodiscard]] std::vector<Eigen::Index> columns(const std::vector<std::string>& names) const;
};

/// Names of the 15 realized components: {sj, jc, cc, rsn, rsp} x {d, w, m}.
const std::vector<std::string>& component_names();

/// Builds rows for every record index >= kWarmup. Columns: rv_d, rv_w, rv_m,
/// the 15 components, log-transformed extra features, raw dummies, and one
/// interaction `rv_d*<dummy>` per dummy.
FeatureFrame build_frame(const StockData& data, std::pair<double, double> weights,
                         const std::vector<int>& horizons);

/// Hansen-Lunde weights estimated on records [first, last].
std::pair<double, double> window_weights(const std::vector<RealizedRecord>& records, std::size_t first,
                                         std::size_t last);

/// Joins realized records with the feature table by date. Throws DataError
/// naming the symbol and date when a record date is missing from the table.
StockData join_features(const std::string& symbol, std::vector<RealizedRecord> records,
                        const std::vector<Date>& table_dates, const std::vector<std::string>& names,
                        const Eigen::MatrixXd& table_values, const std::vector<bool>& is_dummy);

/// CSV dump of a frame (features, targets and realized values per horizon).
void write_frame(const std::filesystem::path& path, const FeatureFrame& frame);
/// JSON list of {name, source} per frame column.
void write_column_manifest(const std::filesystem::path& path, const FeatureFrame& frame);

}  // namespace volcast
