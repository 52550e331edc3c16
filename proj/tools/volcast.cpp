// volcast: volatility forecasting with attention and sentiment features.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>

#include "volcast/config.hpp"
#include "volcast/errors.hpp"
#include "volcast/log.hpp"
#include "volcast/pipeline.hpp"

namespace fs = std::filesystem;
using namespace volcast;

namespace {

enum Exit { ok = 0, usage = 1, data = 2, internal = 3 };

fs::path pick(const std::string& flag, const fs::path& configured, const char* what) {
  const fs::path p = flag.empty() ? configured : fs::path(flag);
  if (p.empty()) throw ConfigError(std::string("no ") + what + " given (flag or config)");
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volatility forecasting toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool verbose = false;
  app.add_option("--config", config_path, "Run configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Random seed (overrides run.seed)");
  app.add_option("--jobs", jobs, "Worker threads, 0 = logical cores (overrides run.jobs)")->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", verbose, "Log progress");

  std::string out, prices, realized, manifest, features, forecasts, audit, sectors;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic market (prices and feature inputs)");
  synth->add_option("--out", out, "Output directory")->required();

  auto* ingest = app.add_subcommand("ingest", "Realized measures from minute prices");
  ingest->add_option("--prices", prices, "Price file or directory of price files");
  ingest->add_option("--out", out, "Output directory for per-symbol realized CSVs")->required();

  auto* feat = app.add_subcommand("features", "Daily feature table and per-stock frame dumps");
  feat->add_option("--realized", realized, "Directory written by ingest")->required();
  feat->add_option("--manifest", manifest, "Feature manifest");
  feat->add_option("--out", out, "Output directory")->required();

  auto* back = app.add_subcommand("backtest", "Rolling out-of-sample forecasts");
  back->add_option("--realized", realized, "Directory written by ingest")->required();
  back->add_option("--features", features, "features.csv written by features")->required();
  back->add_option("--manifest", manifest, "Feature manifest");
  back->add_option("--out", out, "Forecast CSV (audit.jsonl is written beside it)")->required();

  auto* eval = app.add_subcommand("evaluate", "Loss tables, tests and report");
  eval->add_option("--forecasts", forecasts, "Forecast CSV")->required();
  eval->add_option("--audit", audit, "Audit JSON lines (default: audit.jsonl beside the forecasts)");
  eval->add_option("--sectors", sectors, "symbol,sector CSV");
  eval->add_option("--out", out, "Report directory")->required();

  auto* pipe = app.add_subcommand("pipeline", "Run every stage");
  pipe->add_option("--out", out, "Output directory (overrides paths.out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      cfg = load_run_config(config_path);
    } else {
      cfg.propagate();
    }
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (seed || jobs) cfg.propagate();
    set_log_level(verbose ? LogLevel::info : cfg.log_level);

    if (*synth) {
      write_synthetic_market(cfg.synth, out, cfg.jobs);
    } else if (*ingest) {
      const auto symbols = run_ingest(cfg, pick(prices, cfg.paths.prices, "price input"), out);
      info("ingested " + std::to_string(symbols.size()) + " symbols");
    } else if (*feat) {
      run_features(cfg, realized, pick(manifest, cfg.paths.manifest, "manifest"), out);
    } else if (*back) {
      run_backtest_stage(cfg, realized, features, pick(manifest, cfg.paths.manifest, "manifest"), out);
    } else if (*eval) {
      const fs::path a = audit.empty() ? fs::path(forecasts).parent_path() / "audit.jsonl" : fs::path(audit);
      run_evaluate(cfg, forecasts, a, sectors.empty() ? cfg.paths.sectors : fs::path(sectors), out);
    } else if (*pipe) {
      if (!out.empty()) cfg.paths.out = out;
      run_pipeline(cfg);
    }
    return ok;
  } catch (const ConfigError& e) {
    std::cerr << "volcast: configuration error: " << e.what() << '\n';
    return usage;
  } catch (const DataError& e) {
    std::cerr << "volcast: data error: " << e.what() << '\n';
    return data;
  } catch (const std::exception& e) {
    std::cerr << "volcast: internal error: " << e.what() << '\n';
    return internal;
  }
}
