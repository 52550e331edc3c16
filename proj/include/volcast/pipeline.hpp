#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "volcast/attention.hpp"
#include "volcast/config.hpp"
#include "volcast/features.hpp"

namespace volcast {

/// Price files under `path`: the file itself, or every *.csv in the
/// directory, sorted by name.
std::vector<std::filesystem::path> price_files(const std::filesystem::path& path);

/// Realized records of every symbol in the price files, written to
/// `out_dir`/<symbol>.csv. Returns the symbols in sorted order.
std::vector<std::string> run_ingest(const RunConfig& config, const std::filesystem::path& prices,
                                    const std::filesystem::path& out_dir);

struct RealizedSet {
  std::vector<std::string> symbols;
  std::vector<std::vector<RealizedRecord>> records;
};

/// Reads every <symbol>.csv of an ingest directory.
RealizedSet read_realized_dir(const std::filesystem::path& dir);

/// Sorted union of the record dates.
std::vector<Date> union_calendar(const RealizedSet& set);

/// Joins records with the feature table (dummy columns flagged from the manifest).
std::vector<StockData> assemble_stocks(const RealizedSet& set, const FeatureTable& table,
                                       const FeatureManifest& manifest);

/// Wide feature table on the union calendar of the realized records, written
/// to `out_dir`/features.csv, plus a per-stock frame dump and column
/// manifest under `out_dir`/frames.
void run_features(const RunConfig& config, const std::filesystem::path& realized_dir,
                  const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

/// Forecasts (and audit.jsonl beside them).
BacktestResult run_backtest_stage(const RunConfig& config, const std::filesystem::path& realized_dir,
                                  const std::filesystem::path& features_csv, const std::filesystem::path& manifest,
                                  const std::filesystem::path& forecasts_csv);

/// Report files in `out_dir`. A missing sectors file is skipped with a warning.
EvaluationResult run_evaluate(const RunConfig& config, const std::filesystem::path& forecasts_csv,
                              const std::filesystem::path& audit, const std::filesystem::path& sectors,
                              const std::filesystem::path& out_dir);

/// synth (when configured) -> ingest -> features -> backtest -> evaluate
/// under config.paths.out. Errors are rethrown with the failing stage named.
void run_pipeline(const RunConfig& config);

}  // namespace volcast
