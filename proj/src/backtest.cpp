#include "volcast/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"
#include "volcast/log.hpp"
#include "volcast/parallel.hpp"

namespace volcast {

double retransform(double forecast_log, double residual_variance) {
  return std::exp(forecast_log + 0.5 * residual_variance);
}

std::pair<double, bool> insanity_filter(double forecast_var, double lo, double hi) {
  if (forecast_var < lo) return {lo, true};
  if (forecast_var > hi) return {hi, true};
  return {forecast_var, false};
}

namespace {

// Frames of one stock, one per overnight-weight segment.
struct StockFrames {
  std::vector<FeatureFrame> frames;
  Eigen::Index start = 0;  // first origin of segment 0
  int refresh = 1;

  [[nodiscard]] const FeatureFrame& at(Eigen::Index origin) const {
    const auto k = origin < start ? 0 : static_cast<std::size_t>((origin - start) / refresh);
    return frames[std::min(k, frames.size() - 1)];
  }
};

StockFrames build_frames(const StockData& stock, const BacktestConfig& cfg, const std::vector<int>& horizons) {
  const auto& s = cfg.settings;
  const auto rows = static_cast<Eigen::Index>(stock.records.size()) - kWarmup;
  const int hmin = *std::min_element(horizons.begin(), horizons.end());
  const Eigen::Index need = s.estimation_window + s.calibration_window + 2 * hmin - 1;
  if (rows < need) {
    throw DataError(stock.symbol + ": " + std::to_string(std::max<Eigen::Index>(rows, 0)) +
                    " usable days, need at least " + std::to_string(need));
  }
  StockFrames out;
  out.start = s.estimation_window - 1;
  out.refresh = cfg.omega_refresh > 0 ? cfg.omega_refresh : s.estimation_window;
  for (Eigen::Index b = out.start; b < rows; b += out.refresh) {
    // weights from the records of the estimation window ending at origin b
    const auto last = static_cast<std::size_t>(b + kWarmup);
    const auto first = last + 1 - static_cast<std::size_t>(s.estimation_window);
    out.frames.push_back(build_frame(stock, window_weights(stock.records, first, last), horizons));
  }
  return out;
}

struct Task {
  std::size_t stock;
  std::size_t model;
  int horizon;
};

struct TaskOutput {
  std::vector<ForecastRecord> records;
  std::vector<std::string> audit;
  std::size_t failures = 0;
};

TaskOutput run_task(const StockData& stock, const StockFrames& frames, const ModelSpec& spec,
                    const BacktestConfig& cfg, int h) {
  TaskOutput out;
  const auto& s = cfg.settings;
  auto model = make_rolling_model(spec, s, h);
  const Eigen::Index first = first_origin(s, h);
  const Eigen::Index rows = frames.frames.front().rows();
  const Eigen::Index last = rows - 1 - h;
  for (Eigen::Index o = std::max<Eigen::Index>(model->warmup_origin(first), s.estimation_window - 1); o <= last;
       ++o) {
    const auto& frame = frames.at(o);
    const bool emit = o >= first;
    try {
      auto f = model->step(frame, o, emit);
      if (!f) continue;
      const Eigen::VectorXd& realized = frame.realized.at(h);
      const auto window = realized.segment(o - s.estimation_window + 1, s.estimation_window - h);
      const double var = retransform(f->log, f->residual_variance);
      if (!std::isfinite(var) || !(var > 0.0)) {
        throw DataError("non-finite variance forecast (log " + csv::format(f->log) + ")");
      }
      const auto [clamped, filtered] = insanity_filter(var, window.minCoeff(), window.maxCoeff());
      ForecastRecord r{stock.symbol, spec.name, frame.dates[static_cast<std::size_t>(o)], h, clamped, f->log, filtered,
                       realized(o)};
      nlohmann::ordered_json a;
      a["symbol"] = r.symbol;
      a["model"] = r.model;
      a["date"] = r.date.to_string();
      a["horizon"] = h;
      a["residual_variance"] = f->residual_variance;
      for (auto it = f->audit.begin(); it != f->audit.end(); ++it) a[it.key()] = it.value();
      out.records.push_back(std::move(r));
      out.audit.push_back(a.dump());
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      ++out.failures;
      warn("backtest: " + stock.symbol + " " + spec.name + " h=" + std::to_string(h) + " " +
           frame.dates[static_cast<std::size_t>(o)].to_string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

BacktestResult run_backtest(const std::vector<StockData>& stocks, const FeatureCatalog& catalog,
                            const BacktestConfig& config) {
  if (config.horizons.empty()) throw ConfigError("no forecast horizons");
  std::set<int> hs(config.horizons.begin(), config.horizons.end());
  if (*hs.begin() < 1) throw ConfigError("horizons must be positive");
  const std::vector<int> horizons(hs.begin(), hs.end());
  if (config.models.empty()) throw ConfigError("no models configured");
  std::set<std::string> names;
  for (const auto& m : config.models) {
    if (!names.insert(m.name).second) throw ConfigError("duplicate model name " + m.name);
  }
  const auto& s = config.settings;
  if (s.estimation_window < 60) throw ConfigError("estimation window must be at least 60 days");
  if (s.calibration_window < 1) throw ConfigError("calibration window must be positive");

  std::vector<StockFrames> frames(stocks.size());
  parallel_for(stocks.size(), config.jobs, [&](std::size_t i) { frames[i] = build_frames(stocks[i], config, horizons); });

  // resolve once per stock; names are checked against that stock's columns
  std::vector<std::vector<ModelSpec>> resolved(stocks.size());
  for (std::size_t i = 0; i < stocks.size(); ++i) {
    for (const auto& m : config.models) {
      resolved[i].push_back(resolve_model(m, catalog, frames[i].frames.front().names));
    }
  }

  std::vector<Task> tasks;
  for (std::size_t i = 0; i < stocks.size(); ++i)
    for (std::size_t m = 0; m < config.models.size(); ++m)
      for (int h : horizons) tasks.push_back({i, m, h});
  std::vector<TaskOutput> outputs(tasks.size());
  parallel_for(tasks.size(), config.jobs, [&](std::size_t t) {
    const auto& task = tasks[t];
    outputs[t] = run_task(stocks[task.stock], frames[task.stock], resolved[task.stock][task.model], config,
                          task.horizon);
  });

  std::vector<std::pair<ForecastRecord, std::string>> merged;
  BacktestResult result;
  for (auto& o : outputs) {
    result.failures += o.failures;
    for (std::size_t k = 0; k < o.records.size(); ++k) merged.emplace_back(std::move(o.records[k]), std::move(o.audit[k]));
  }
  std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.symbol, a.first.model, a.first.date, a.first.horizon) <
           std::tie(b.first.symbol, b.first.model, b.first.date, b.first.horizon);
  });
  for (auto& [r, a] : merged) {
    result.forecasts.push_back(std::move(r));
    result.audit.push_back(std::move(a));
  }
  return result;
}

void write_forecasts(const std::filesystem::path& path, const std::vector<ForecastRecord>& records) {
  auto out = csv::open_out(path);
  out << "symbol,model,date,horizon,forecast_var,forecast_log,filtered,realized\n";
  for (const auto& r : records) {
    out << r.symbol << ',' << r.model << ',' << r.date.to_string() << ',' << r.horizon << ','
        << csv::format(r.forecast_var) << ',' << csv::format(r.forecast_log) << ',' << (r.filtered ? 1 : 0) << ','
        << csv::format(r.realized) << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<ForecastRecord> read_forecasts(const std::filesystem::path& path) {
  csv::Reader in(path);
  const std::size_t c[] = {in.column("symbol"), in.column("model"), in.column("date"), in.column("horizon"),
                           in.column("forecast_var"), in.column("forecast_log"), in.column("filtered"),
                           in.column("realized")};
  std::vector<ForecastRecord> out;
  std::vector<std::string> f;
  while (in.next(f)) {
    if (f.size() != in.header().size()) in.fail("expected " + std::to_string(in.header().size()) + " fields");
    ForecastRecord r;
    r.symbol = f[c[0]];
    r.model = f[c[1]];
    try {
      r.date = Date::parse(f[c[2]]);
    } catch (const std::exception& e) {
      in.fail(e.what());
    }
    r.horizon = static_cast<int>(csv::to_long(in, f[c[3]]));
    r.forecast_var = csv::to_double(in, f[c[4]]);
    r.forecast_log = csv::to_double(in, f[c[5]]);
    const long filtered = csv::to_long(in, f[c[6]]);
    if (filtered != 0 && filtered != 1) in.fail("filtered must be 0 or 1");
    r.filtered = filtered == 1;
    r.realized = csv::to_double(in, f[c[7]]);
    if (r.symbol.empty() || r.model.empty()) in.fail("empty symbol or model");
    if (r.horizon < 1) in.fail("horizon must be positive");
    out.push_back(std::move(r));
  }
  return out;
}

void write_audit(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  auto out = csv::open_out(path);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace volcast
