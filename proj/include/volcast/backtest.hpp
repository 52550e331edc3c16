#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "volcast/date.hpp"
#include "volcast/features.hpp"
#include "volcast/models.hpp"

namespace volcast {

struct BacktestConfig {
  ModelSettings settings;  // windows, family hyperparameters, seed
  std::vector<int> horizons{1};
  std::vector<ModelSpec> models = default_models();
  int omega_refresh = 0;  // origins between overnight-weight updates; 0 = estimation window
  int jobs = 1;
};

struct ForecastRecord {
  std::string symbol;
  std::string model;
  Date date;  // information date of the forecast
  int horizon = 1;
  double forecast_var = 0.0;
  double forecast_log = 0.0;
  bool filtered = false;
  double realized = 0.0;
};

struct BacktestResult {
  std::vector<ForecastRecord> forecasts;  // sorted by symbol, model, date, horizon
  std::vector<std::string> audit;         // one JSON object per line, same order
  std::size_t failures = 0;               // skipped (model, day) pairs
};

/// exp(forecast_log + residual_variance / 2).
double retransform(double forecast_log, double residual_variance);

/// Clamps to [lo, hi]; the flag tells whether clamping happened.
std::pair<double, bool> insanity_filter(double forecast_var, double lo, double hi);

/// First origin (frame row) with a full estimation and calibration history.
inline Eigen::Index first_origin(const ModelSettings& s, int horizon) {
  return s.estimation_window + s.calibration_window + horizon - 2;
}

/// Rolling out-of-sample forecasts for every stock, model and horizon.
/// Throws DataError when a stock has too few usable days and ConfigError
/// for invalid settings or unknown features. A model failing on one day is
/// logged and skipped.
BacktestResult run_backtest(const std::vector<StockData>& stocks, const FeatureCatalog& catalog,
                            const BacktestConfig& config);

void write_forecasts(const std::filesystem::path& path, const std::vector<ForecastRecord>& records);
std::vector<ForecastRecord> read_forecasts(const std::filesystem::path& path);
void write_audit(const std::filesystem::path& path, const std::vector<std::string>& lines);

}  // namespace volcast
