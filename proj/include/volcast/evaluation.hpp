#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "volcast/backtest.hpp"
#include "volcast/stats.hpp"

namespace volcast {

enum class LossKind { mse, qlike, mae, mape };

std::string to_string(LossKind k);
LossKind parse_loss(const std::string& s);
inline const std::vector<LossKind>& all_losses() {
  static const std::vector<LossKind> v{LossKind::mse, LossKind::qlike, LossKind::mae, LossKind::mape};
  return v;
}

/// Loss of one forecast. QLIKE uses u = realized / forecast: u - ln u - 1.
double loss(LossKind kind, double realized, double forecast);

struct AverageLoss {
  double value = 0.0;
  std::size_t n = 0;
  std::size_t excluded = 0;  // nonpositive inputs where the loss needs positive ones
};

AverageLoss average_loss(LossKind kind, std::span<const double> realized, std::span<const double> forecast);

/// Indices of the highest-realized share of records (latest date first
/// among ties) and the rest. The high set has floor(fraction * n) members.
struct DecileSplit {
  std::vector<std::size_t> high;
  std::vector<std::size_t> low;
};
DecileSplit decile_split(const std::vector<double>& realized, const std::vector<Date>& dates, double fraction = 0.10);

/// Share of preferred-cluster feature slots taken by each feature, per CSR
/// model and horizon, averaged over stocks. Reads the "selected" lists of
/// the audit lines; lines without one are ignored. Shares are fractions in
/// [0, 1] and sum to 1 per (model, horizon). Sorted by model, horizon, then
/// descending share.
struct ImportanceRow {
  std::string model;
  int horizon = 1;
  std::string feature;
  double share = 0.0;
  std::size_t stocks = 0;  // stocks with audit lines for this model
};
std::vector<ImportanceRow> csr_importance(const std::vector<std::string>& audit_lines);

/// symbol -> sector, from a `symbol,sector` CSV.
std::map<std::string, std::string> read_sectors(const std::filesystem::path& path);

struct EvaluationConfig {
  std::string benchmark = "HAR";
  double mcs_alpha = 0.05;
  int mcs_bootstrap = 2000;
  double decile = 0.10;
  std::vector<LossKind> mcs_losses{LossKind::mse, LossKind::qlike};
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct LossRow {
  std::string symbol, model;
  int horizon = 1;
  std::string subset;  // all, high, low
  LossKind kind = LossKind::mse;
  AverageLoss loss;
};

struct RankRow {
  std::string symbol;
  int horizon = 1;
  LossKind kind = LossKind::mse;
  std::string model;
  double rank = 0.0;
};

struct McsRow {
  std::string symbol;
  int horizon = 1;
  LossKind kind = LossKind::mse;
  std::string model, benchmark;
  PairwiseMcs result;
};

struct WilcoxonRow {
  int horizon = 1;
  LossKind kind = LossKind::mse;
  std::string row_model, col_model;  // alternative: the column model has lower loss
  WilcoxonResult test;
  double p_holm = 1.0;
};

struct EvaluationResult {
  std::vector<std::string> models;  // benchmark first, then as they appear
  std::vector<std::string> symbols;
  std::vector<int> horizons;
  std::vector<LossRow> losses;
  std::vector<RankRow> ranks;
  std::vector<McsRow> mcs;
  std::vector<WilcoxonRow> wilcoxon;
  std::vector<ImportanceRow> importance;
  std::map<std::string, std::string> sectors;

  /// Average loss of (symbol, model, horizon, subset, kind); NaN when absent.
  [[nodiscard]] double value(const std::string& symbol, const std::string& model, int horizon,
                             const std::string& subset, LossKind kind) const;
};

/// Losses, ranks, pairwise MCS against the benchmark, Wilcoxon-Holm across
/// stocks, CSR importance. Each (symbol, horizon) is evaluated on the dates
/// where every model has a forecast. Throws DataError when the benchmark is
/// missing.
EvaluationResult evaluate(const std::vector<ForecastRecord>& forecasts, const std::vector<std::string>& audit,
                          const std::map<std::string, std::string>& sectors, const EvaluationConfig& config);

/// Improvement of a model over the benchmark in percent, 100 (Lb - Lm) / Lb.
inline double improvement(double benchmark_loss, double model_loss) {
  return 100.0 * (benchmark_loss - model_loss) / benchmark_loss;
}

/// Writes losses.csv, ranks.csv, mcs.csv, wilcoxon.csv, importance.csv and
/// report.txt into `dir`.
void write_report(const std::filesystem::path& dir, const EvaluationResult& result, const EvaluationConfig& config);

}  // namespace volcast
