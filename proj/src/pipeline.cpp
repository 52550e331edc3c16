#include "volcast/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "volcast/errors.hpp"
#include "volcast/log.hpp"
#include "volcast/parallel.hpp"

namespace volcast {

namespace fs = std::filesystem;

std::vector<fs::path> price_files(const fs::path& path) {
  if (path.empty()) throw ConfigError("no price input configured");
  if (fs::is_regular_file(path)) return {path};
  if (!fs::is_directory(path)) throw DataError("price input " + path.string() + " does not exist");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(path)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no .csv price files in " + path.string());
  return out;
}

std::vector<std::string> run_ingest(const RunConfig& config, const fs::path& prices, const fs::path& out_dir) {
  struct Job {
    fs::path file;
    std::string symbol;
  };
  std::vector<Job> jobs;
  std::set<std::string> seen;
  for (const auto& file : price_files(prices)) {
    for (const auto& s : list_symbols(file)) {
      if (!seen.insert(s).second) throw DataError("symbol " + s + " appears in more than one price file");
      jobs.push_back({file, s});
    }
  }
  fs::create_directories(out_dir);
  parallel_for(jobs.size(), config.jobs, [&](std::size_t i) {
    const auto panel = load_prices(jobs[i].file, jobs[i].symbol, config.session);
    if (panel.days.size() < 2) throw DataError(jobs[i].symbol + ": fewer than two usable trading days");
    write_realized(out_dir / (jobs[i].symbol + ".csv"), realized_records(panel, config.realized));
    info("ingest: " + jobs[i].symbol + " " + std::to_string(panel.days.size()) + " days");
  });
  return {seen.begin(), seen.end()};
}

RealizedSet read_realized_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("realized directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no realized files in " + dir.string());
  RealizedSet out;
  for (const auto& f : files) {
    out.symbols.push_back(f.stem().string());
    out.records.push_back(read_realized(f));
  }
  return out;
}

std::vector<Date> union_calendar(const RealizedSet& set) {
  std::set<Date> dates;
  for (const auto& recs : set.records)
    for (const auto& r : recs) dates.insert(r.date);
  return {dates.begin(), dates.end()};
}

std::vector<StockData> assemble_stocks(const RealizedSet& set, const FeatureTable& table,
                                       const FeatureManifest& manifest) {
  std::vector<bool> dummy;
  for (const auto& n : table.names) {
    const auto* f = manifest.find(n);
    if (!f) throw DataError("feature table column " + n + " is not in the manifest");
    dummy.push_back(f->group == FeatureGroup::dummy);
  }
  std::vector<StockData> out;
  for (std::size_t i = 0; i < set.symbols.size(); ++i) {
    out.push_back(join_features(set.symbols[i], set.records[i], table.dates, table.names, table.values, dummy));
  }
  return out;
}

void run_features(const RunConfig& config, const fs::path& realized_dir, const fs::path& manifest_path,
                  const fs::path& out_dir) {
  const auto set = read_realized_dir(realized_dir);
  const auto manifest = read_manifest(manifest_path);
  const auto table = build_features(manifest, manifest_path.parent_path(), union_calendar(set));
  fs::create_directories(out_dir / "frames");
  write_feature_table(out_dir / "features.csv", table);
  const auto stocks = assemble_stocks(set, table, manifest);
  const int e = config.backtest.settings.estimation_window;
  parallel_for(stocks.size(), config.jobs, [&](std::size_t i) {
    const auto& s = stocks[i];
    if (s.records.size() <= static_cast<std::size_t>(kWarmup)) {
      warn("features: " + s.symbol + " has too few days for a frame dump");
      return;
    }
    // overnight weights of the first estimation window, as the backtest uses them
    const auto last = std::min(s.records.size() - 1, static_cast<std::size_t>(kWarmup + e - 1));
    const auto first = last + 1 >= static_cast<std::size_t>(e) ? last + 1 - static_cast<std::size_t>(e) : 0;
    const auto w = last - first + 1 >= 60 ? window_weights(s.records, first, last) : std::make_pair(1.0, 1.0);
    const auto frame = build_frame(s, w, config.backtest.horizons);
    write_frame(out_dir / "frames" / (s.symbol + ".csv"), frame);
    write_column_manifest(out_dir / "frames" / (s.symbol + ".columns.json"), frame);
  });
}

BacktestResult run_backtest_stage(const RunConfig& config, const fs::path& realized_dir,
                                  const fs::path& features_csv, const fs::path& manifest_path,
                                  const fs::path& forecasts_csv) {
  const auto set = read_realized_dir(realized_dir);
  const auto manifest = read_manifest(manifest_path);
  const auto table = read_feature_table(features_csv);
  const auto stocks = assemble_stocks(set, table, manifest);
  auto result = run_backtest(stocks, FeatureCatalog::from_manifest(manifest), config.backtest);
  if (result.failures > 0) warn("backtest: " + std::to_string(result.failures) + " model-days skipped");
  write_forecasts(forecasts_csv, result.forecasts);
  write_audit(forecasts_csv.parent_path() / "audit.jsonl", result.audit);
  return result;
}

EvaluationResult run_evaluate(const RunConfig& config, const fs::path& forecasts_csv, const fs::path& audit,
                              const fs::path& sectors, const fs::path& out_dir) {
  const auto forecasts = read_forecasts(forecasts_csv);
  std::vector<std::string> lines;
  if (!audit.empty() && fs::exists(audit)) {
    std::ifstream in(audit);
    for (std::string l; std::getline(in, l);)
      if (!l.empty()) lines.push_back(l);
  } else {
    warn("evaluate: no audit file; importance table left empty");
  }
  std::map<std::string, std::string> sector_map;
  if (!sectors.empty() && fs::exists(sectors)) {
    sector_map = read_sectors(sectors);
  } else {
    warn("evaluate: sectors file " + (sectors.empty() ? std::string("not configured") : sectors.string() + " missing") +
         "; no sector panel");
  }
  auto result = evaluate(forecasts, lines, sector_map, config.evaluation);
  write_report(out_dir, result, config.evaluation);
  return result;
}

namespace {

template <class Fn>
void stage(const std::string& name, Fn&& fn) {
  info("stage " + name);
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError("stage " + name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error("stage " + name + ": " + e.what());
  }
}

}  // namespace

void run_pipeline(const RunConfig& config) {
  const fs::path out = config.paths.out;
  fs::path prices = config.paths.prices;
  fs::path manifest = config.paths.manifest;
  fs::path sectors = config.paths.sectors;
  if (config.synthesize) {
    stage("synth", [&] { write_synthetic_market(config.synth, out / "data", config.jobs); });
    prices = out / "data" / "prices";
    manifest = out / "data" / "manifest.json";
    if (sectors.empty()) sectors = out / "data" / "sectors.csv";
  } else {
    if (prices.empty()) throw ConfigError("paths.prices is required unless run.synthesize = true");
    if (manifest.empty()) throw ConfigError("paths.manifest is required unless run.synthesize = true");
    if (!fs::exists(prices)) throw ConfigError("paths.prices " + prices.string() + " does not exist");
    if (!fs::exists(manifest)) throw ConfigError("paths.manifest " + manifest.string() + " does not exist");
  }
  stage("ingest", [&] { run_ingest(config, prices, out / "realized"); });
  stage("features", [&] { run_features(config, out / "realized", manifest, out / "features"); });
  stage("backtest", [&] {
    run_backtest_stage(config, out / "realized", out / "features" / "features.csv", manifest, out / "forecasts.csv");
  });
  stage("evaluate", [&] { run_evaluate(config, out / "forecasts.csv", out / "audit.jsonl", sectors, out / "report"); });
}

}  // namespace volcast
