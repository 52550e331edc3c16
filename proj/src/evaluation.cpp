#include "volcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"
#include "volcast/forest.hpp"
#include "volcast/log.hpp"
#include "volcast/parallel.hpp"

namespace volcast {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const char* const kSubsets[] = {"all", "high", "low"};
}  // namespace

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::mse: return "MSE";
    case LossKind::qlike: return "QLIKE";
    case LossKind::mae: return "MAE";
    case LossKind::mape: return "MAPE";
  }
  return "?";
}

LossKind parse_loss(const std::string& s) {
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (LossKind k : all_losses()) {
    if (to_string(k) == u) return k;
  }
  throw ConfigError("unknown loss '" + s + "' (expected MSE, QLIKE, MAE or MAPE)");
}

// NaN marks an excluded row: QLIKE needs both inputs positive, MAPE a
// positive realized value (and a positive forecast).
double loss(LossKind kind, double realized, double forecast) {
  const double e = realized - forecast;
  switch (kind) {
    case LossKind::mse: return e * e;
    case LossKind::mae: return std::abs(e);
    case LossKind::qlike: {
      if (!(realized > 0.0) || !(forecast > 0.0)) return kNaN;
      const double u = realized / forecast;
      return u - std::log(u) - 1.0;
    }
    case LossKind::mape:
      if (!(realized > 0.0) || !(forecast > 0.0)) return kNaN;
      return std::abs(e) / realized;
  }
  return kNaN;
}

AverageLoss average_loss(LossKind kind, std::span<const double> realized, std::span<const double> forecast) {
  if (realized.size() != forecast.size()) throw std::invalid_argument("average_loss: size mismatch");
  AverageLoss out;
  double sum = 0.0;
  for (std::size_t i = 0; i < realized.size(); ++i) {
    const double l = loss(kind, realized[i], forecast[i]);
    if (std::isnan(l)) {
      ++out.excluded;
      continue;
    }
    sum += l;
    ++out.n;
  }
  out.value = out.n > 0 ? sum / static_cast<double>(out.n) : kNaN;
  return out;
}

DecileSplit decile_split(const std::vector<double>& realized, const std::vector<Date>& dates, double fraction) {
  if (realized.size() != dates.size()) throw std::invalid_argument("decile_split: size mismatch");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("decile_split: fraction outside [0, 1]");
  const std::size_t n = realized.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (realized[a] != realized[b]) return realized[a] > realized[b];
    if (dates[a] != dates[b]) return dates[a] > dates[b];
    return a < b;
  });
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  DecileSplit out;
  out.high.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  out.low.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  std::sort(out.high.begin(), out.high.end());
  std::sort(out.low.begin(), out.low.end());
  return out;
}

std::vector<ImportanceRow> csr_importance(const std::vector<std::string>& audit_lines) {
  // (model, horizon) -> symbol -> feature -> count, plus slot totals
  struct Counts {
    std::map<std::string, double> feature;
    double slots = 0.0;
  };
  std::map<std::pair<std::string, int>, std::map<std::string, Counts>> tally;
  for (const auto& line : audit_lines) {
    if (line.empty()) continue;
    nlohmann::json a;
    try {
      a = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw DataError(std::string("audit: malformed line: ") + e.what());
    }
    if (!a.contains("selected")) continue;
    auto& c = tally[{a.at("model").get<std::string>(), a.at("horizon").get<int>()}][a.at("symbol").get<std::string>()];
    for (const auto& sub : a.at("selected")) {
      for (const auto& f : sub) {
        c.feature[f.get<std::string>()] += 1.0;
        c.slots += 1.0;
      }
    }
  }
  std::vector<ImportanceRow> out;
  for (const auto& [key, stocks] : tally) {
    std::map<std::string, double> share;
    std::size_t used = 0;
    for (const auto& [symbol, c] : stocks) {
      if (c.slots <= 0.0) continue;
      ++used;
      for (const auto& [f, n] : c.feature) share[f] += n / c.slots;
    }
    std::vector<ImportanceRow> rows;
    for (const auto& [f, s] : share) {
      rows.push_back({key.first, key.second, f, used > 0 ? s / static_cast<double>(used) : 0.0, used});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.share > b.share; });
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::map<std::string, std::string> read_sectors(const std::filesystem::path& path) {
  csv::Reader in(path);
  const std::size_t cs = in.column("symbol");
  const std::size_t cx = in.column("sector");
  std::map<std::string, std::string> out;
  std::vector<std::string> f;
  while (in.next(f)) {
    if (f.size() != in.header().size()) in.fail("expected " + std::to_string(in.header().size()) + " fields");
    if (f[cs].empty() || f[cx].empty()) in.fail("empty symbol or sector");
    if (!out.emplace(f[cs], f[cx]).second) in.fail("duplicate symbol " + f[cs]);
  }
  return out;
}

double EvaluationResult::value(const std::string& symbol, const std::string& model, int horizon,
                               const std::string& subset, LossKind kind) const {
  for (const auto& r : losses) {
    if (r.symbol == symbol && r.model == model && r.horizon == horizon && r.subset == subset && r.kind == kind) {
      return r.loss.value;
    }
  }
  return kNaN;
}

namespace {

// Aligned forecasts of one (symbol, horizon): column m of `forecast` is model m.
struct Panel {
  std::string symbol;
  int horizon = 1;
  std::vector<std::size_t> models;  // indices into EvaluationResult::models
  std::vector<Date> dates;
  std::vector<double> realized;
  std::vector<std::vector<double>> forecast;  // per model
};

std::vector<std::string> order_models(const std::vector<ForecastRecord>& forecasts, const std::string& benchmark) {
  std::set<std::string> present;
  for (const auto& r : forecasts) present.insert(r.model);
  if (!present.count(benchmark)) throw DataError("evaluate: benchmark model " + benchmark + " has no forecasts");
  std::vector<std::string> out{benchmark};
  for (const auto& m : default_models()) {
    if (m.name != benchmark && present.erase(m.name)) out.push_back(m.name);
  }
  present.erase(benchmark);
  out.insert(out.end(), present.begin(), present.end());
  return out;
}

std::vector<Panel> build_panels(const std::vector<ForecastRecord>& forecasts, const std::vector<std::string>& models) {
  std::map<std::string, std::size_t> model_index;
  for (std::size_t m = 0; m < models.size(); ++m) model_index[models[m]] = m;
  // (symbol, horizon) -> model -> date -> (forecast, realized)
  std::map<std::pair<std::string, int>, std::map<std::size_t, std::map<Date, std::pair<double, double>>>> grouped;
  for (const auto& r : forecasts) {
    auto& slot = grouped[{r.symbol, r.horizon}][model_index.at(r.model)];
    if (!slot.emplace(r.date, std::make_pair(r.forecast_var, r.realized)).second) {
      throw DataError("evaluate: duplicate forecast " + r.symbol + " " + r.model + " " + r.date.to_string() +
                      " h=" + std::to_string(r.horizon));
    }
  }
  std::vector<Panel> panels;
  for (auto& [key, by_model] : grouped) {
    Panel p;
    p.symbol = key.first;
    p.horizon = key.second;
    if (!by_model.count(0)) {
      warn("evaluate: " + p.symbol + " h=" + std::to_string(p.horizon) + " has no benchmark forecasts; skipped");
      continue;
    }
    for (const auto& [m, _] : by_model) p.models.push_back(m);
    const auto& base = by_model.at(0);
    std::size_t dropped = 0;
    for (const auto& [date, fr] : base) {
      bool all = true;
      for (std::size_t m : p.models) all = all && by_model.at(m).count(date);
      if (!all) {
        ++dropped;
        continue;
      }
      p.dates.push_back(date);
      p.realized.push_back(fr.second);
    }
    if (dropped > 0) {
      warn("evaluate: " + p.symbol + " h=" + std::to_string(p.horizon) + ": " + std::to_string(dropped) +
           " dates lack a forecast from some model; compared on " + std::to_string(p.dates.size()) + " common dates");
    }
    for (std::size_t m : p.models) {
      std::vector<double> f;
      f.reserve(p.dates.size());
      for (Date d : p.dates) f.push_back(by_model.at(m).at(d).first);
      p.forecast.push_back(std::move(f));
    }
    if (!p.dates.empty()) panels.push_back(std::move(p));
  }
  return panels;
}

std::vector<double> pick(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace

EvaluationResult evaluate(const std::vector<ForecastRecord>& forecasts, const std::vector<std::string>& audit,
                          const std::map<std::string, std::string>& sectors, const EvaluationConfig& config) {
  if (config.mcs_bootstrap < 1) throw ConfigError("mcs_bootstrap must be positive");
  if (!(config.mcs_alpha > 0.0 && config.mcs_alpha < 1.0)) throw ConfigError("mcs_alpha must be in (0, 1)");
  if (!(config.decile > 0.0 && config.decile < 1.0)) throw ConfigError("decile fraction must be in (0, 1)");
  if (forecasts.empty()) throw DataError("evaluate: no forecasts");

  EvaluationResult res;
  res.models = order_models(forecasts, config.benchmark);
  res.sectors = sectors;
  const auto panels = build_panels(forecasts, res.models);
  {
    std::set<std::string> syms;
    std::set<int> hs;
    for (const auto& p : panels) {
      syms.insert(p.symbol);
      hs.insert(p.horizon);
    }
    res.symbols.assign(syms.begin(), syms.end());
    res.horizons.assign(hs.begin(), hs.end());
  }

  // average losses and ranks
  for (const auto& p : panels) {
    const auto split = decile_split(p.realized, p.dates, config.decile);
    if (p.dates.size() < 10) {
      warn("evaluate: " + p.symbol + " h=" + std::to_string(p.horizon) + " has fewer than 10 forecast days");
    }
    std::vector<std::size_t> all(p.dates.size());
    std::iota(all.begin(), all.end(), 0);
    const std::vector<std::size_t>* sets[] = {&all, &split.high, &split.low};
    for (LossKind kind : all_losses()) {
      std::vector<double> ranked;
      std::vector<std::size_t> ranked_models;
      for (std::size_t k = 0; k < p.models.size(); ++k) {
        for (int s = 0; s < 3; ++s) {
          const auto r = pick(p.realized, *sets[s]);
          const auto f = pick(p.forecast[k], *sets[s]);
          const auto avg = average_loss(kind, r, f);
          if (s == 0 && avg.excluded > 0) {
            warn("evaluate: " + p.symbol + " " + res.models[p.models[k]] + " " + to_string(kind) + ": " +
                 std::to_string(avg.excluded) + " rows excluded (nonpositive values)");
          }
          res.losses.push_back({p.symbol, res.models[p.models[k]], p.horizon, kSubsets[s], kind, avg});
          if (s == 0 && avg.n > 0) {
            ranked.push_back(avg.value);
            ranked_models.push_back(p.models[k]);
          }
        }
      }
      const auto rk = midranks(ranked);
      for (std::size_t k = 0; k < rk.size(); ++k) {
        res.ranks.push_back({p.symbol, p.horizon, kind, res.models[ranked_models[k]], rk[k]});
      }
    }
  }

  // pairwise MCS of each model against the benchmark, per stock
  struct Cell {
    std::size_t panel;
    std::size_t model;  // position in panel.models
    LossKind kind;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < panels.size(); ++i)
    for (LossKind kind : config.mcs_losses)
      for (std::size_t k = 1; k < panels[i].models.size(); ++k) cells.push_back({i, k, kind});
  res.mcs.resize(cells.size());
  parallel_for(cells.size(), config.jobs, [&](std::size_t c) {
    const auto& cell = cells[c];
    const auto& p = panels[cell.panel];
    std::vector<double> li, lj;
    for (std::size_t t = 0; t < p.dates.size(); ++t) {
      const double a = loss(cell.kind, p.realized[t], p.forecast[cell.model][t]);
      const double b = loss(cell.kind, p.realized[t], p.forecast[0][t]);
      if (std::isnan(a) || std::isnan(b)) continue;
      li.push_back(a);
      lj.push_back(b);
    }
    McsRow row{p.symbol, p.horizon, cell.kind, res.models[p.models[cell.model]], res.models[0], {}};
    if (li.size() >= 2) {
      const auto seed = task_seed(config.seed, "mcs/" + p.symbol + "/" + row.model + "/" + to_string(cell.kind),
                                  p.horizon);
      row.result = pairwise_mcs(Eigen::Map<const Eigen::VectorXd>(li.data(), static_cast<Eigen::Index>(li.size())),
                                Eigen::Map<const Eigen::VectorXd>(lj.data(), static_cast<Eigen::Index>(lj.size())),
                                config.mcs_alpha, config.mcs_bootstrap, seed);
    }
    res.mcs[c] = std::move(row);
  });

  // Wilcoxon across stocks for every ordered model pair, Holm per (horizon, loss)
  for (int h : res.horizons) {
    for (LossKind kind : all_losses()) {
      std::map<std::pair<std::string, std::string>, double> per_stock;  // (symbol, model) -> loss
      for (const auto& r : res.losses) {
        if (r.horizon == h && r.kind == kind && r.subset == "all" && r.loss.n > 0) {
          per_stock[{r.symbol, r.model}] = r.loss.value;
        }
      }
      std::vector<WilcoxonRow> family;
      for (const auto& row : res.models) {
        for (const auto& col : res.models) {
          if (row == col) continue;
          std::vector<double> d;
          for (const auto& s : res.symbols) {
            const auto a = per_stock.find({s, row});
            const auto b = per_stock.find({s, col});
            if (a != per_stock.end() && b != per_stock.end()) d.push_back(a->second - b->second);
          }
          family.push_back({h, kind, row, col, wilcoxon_signed_rank(d), 1.0});
        }
      }
      std::vector<double> raw;
      for (const auto& w : family) raw.push_back(w.test.p_value);
      const auto adj = holm_adjust(raw);
      for (std::size_t i = 0; i < family.size(); ++i) family[i].p_holm = adj[i];
      res.wilcoxon.insert(res.wilcoxon.end(), family.begin(), family.end());
    }
  }
  if (res.symbols.size() < 6 && res.models.size() > 1) {
    warn("evaluate: Wilcoxon tests use " + std::to_string(res.symbols.size()) +
         " stocks; at least 6 are needed for a rejection at 5%");
  }

  res.importance = csr_importance(audit);
  return res;
}

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string fixed(double x, int digits = 2) {
  if (std::isnan(x)) return "NA";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

// Per stock outcome of one model against the benchmark.
struct Versus {
  std::vector<std::string> symbols;
  std::vector<double> improvement;
  std::vector<bool> wins;
};

Versus versus(const EvaluationResult& r, const std::string& model, int h, LossKind kind, const std::string& subset) {
  std::map<std::pair<std::string, std::string>, double> v;
  for (const auto& l : r.losses) {
    if (l.horizon == h && l.kind == kind && l.subset == subset && l.loss.n > 0) v[{l.symbol, l.model}] = l.loss.value;
  }
  Versus out;
  for (const auto& s : r.symbols) {
    const auto b = v.find({s, r.models.front()});
    const auto m = v.find({s, model});
    if (b == v.end() || m == v.end()) continue;
    out.symbols.push_back(s);
    out.improvement.push_back(b->second > 0.0 ? improvement(b->second, m->second) : kNaN);
    out.wins.push_back(m->second < b->second);
  }
  return out;
}

double share(const std::vector<bool>& w) {
  if (w.empty()) return kNaN;
  return 100.0 * static_cast<double>(std::count(w.begin(), w.end(), true)) / static_cast<double>(w.size());
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    s += x;
    ++n;
  }
  return n > 0 ? s / static_cast<double>(n) : kNaN;
}

void table(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out << (c == 0 ? "" : "  ") << (c == 0 ? std::left : std::right) << std::setw(static_cast<int>(width[c]))
          << r[c];
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  out << '\n';
}

void write_text(std::ostream& out, const EvaluationResult& r, const EvaluationConfig& cfg) {
  const auto& bench = r.models.front();
  out << "Forecast evaluation\n";
  out << "stocks: " << r.symbols.size() << "  models: " << r.models.size() << "  benchmark: " << bench << "\n\n";
  for (int h : r.horizons) {
    for (LossKind kind : all_losses()) {
      out << "== horizon " << h << ", " << to_string(kind) << " ==\n\n";
      std::vector<std::vector<std::string>> rows;
      for (const auto& m : r.models) {
        const auto v = versus(r, m, h, kind, "all");
        double rank = 0.0;
        std::size_t nr = 0;
        for (const auto& x : r.ranks) {
          if (x.horizon == h && x.kind == kind && x.model == m) {
            rank += x.rank;
            ++nr;
          }
        }
        rows.push_back({m, fixed(share(v.wins)), fixed(nr > 0 ? rank / static_cast<double>(nr) : kNaN),
                        fixed(mean(v.improvement)), fixed(quantile(v.improvement, 0.05)),
                        fixed(quantile(v.improvement, 0.25)), fixed(quantile(v.improvement, 0.50)),
                        fixed(quantile(v.improvement, 0.75)), fixed(quantile(v.improvement, 0.95))});
      }
      out << "Panel A: % of stocks outperforming " << bench << "; Panel B: average rank; Panel C: improvement %\n";
      table(out, {"model", "A:%out", "B:rank", "C:mean", "q05", "q25", "q50", "q75", "q95"}, rows);

      rows.clear();
      for (const auto& m : r.models) {
        const auto hi = versus(r, m, h, kind, "high");
        const auto lo = versus(r, m, h, kind, "low");
        rows.push_back({m, fixed(share(hi.wins)), fixed(mean(hi.improvement)), fixed(share(lo.wins)),
                        fixed(mean(lo.improvement))});
      }
      out << "Highest " << fixed(100.0 * cfg.decile, 0) << "% realized days vs the rest\n";
      table(out, {"model", "high:%out", "high:impr", "low:%out", "low:impr"}, rows);

      if (!r.sectors.empty()) {
        std::set<std::string> names;
        for (const auto& s : r.symbols) {
          const auto it = r.sectors.find(s);
          names.insert(it == r.sectors.end() ? "(none)" : it->second);
        }
        std::vector<std::string> header{"model"};
        header.insert(header.end(), names.begin(), names.end());
        rows.clear();
        for (const auto& m : r.models) {
          const auto v = versus(r, m, h, kind, "all");
          std::vector<std::string> row{m};
          for (const auto& sec : names) {
            std::vector<bool> w;
            for (std::size_t i = 0; i < v.symbols.size(); ++i) {
              const auto it = r.sectors.find(v.symbols[i]);
              if ((it == r.sectors.end() ? "(none)" : it->second) == sec) w.push_back(v.wins[i]);
            }
            row.push_back(fixed(share(w)));
          }
          rows.push_back(std::move(row));
        }
        out << "% of stocks outperforming " << bench << " by sector\n";
        table(out, header, rows);
      }

      if (std::find(cfg.mcs_losses.begin(), cfg.mcs_losses.end(), kind) != cfg.mcs_losses.end()) {
        rows.clear();
        for (const auto& m : r.models) {
          if (m == bench) continue;
          std::size_t n = 0, keep_m = 0, keep_b = 0, both = 0;
          for (const auto& x : r.mcs) {
            if (x.horizon != h || x.kind != kind || x.model != m) continue;
            ++n;
            keep_m += x.result.keep_i;
            keep_b += x.result.keep_j;
            both += x.result.keep_i && x.result.keep_j;
          }
          auto pct = [&](std::size_t k) { return fixed(n > 0 ? 100.0 * static_cast<double>(k) / static_cast<double>(n) : kNaN); };
          rows.push_back({m, pct(keep_m), pct(keep_b), pct(both)});
        }
        out << "Pairwise MCS vs " << bench << " (alpha " << cfg.mcs_alpha << "): % of stocks where each survives\n";
        table(out, {"model", "model kept", "bench kept", "both kept"}, rows);
      }
    }
  }
  std::map<std::pair<std::string, int>, std::vector<const ImportanceRow*>> imp;
  for (const auto& x : r.importance) imp[{x.model, x.horizon}].push_back(&x);
  for (const auto& [key, rows] : imp) {
    out << "Importance in preferred CSR cluster: " << key.first << ", horizon " << key.second << " ("
        << (rows.empty() ? 0 : rows.front()->stocks) << " stocks)\n";
    std::vector<std::vector<std::string>> t;
    for (std::size_t i = 0; i < std::min<std::size_t>(10, rows.size()); ++i) {
      t.push_back({rows[i]->feature, fixed(100.0 * rows[i]->share)});
    }
    table(out, {"feature", "%"}, t);
  }
}

void check(std::ofstream& out, const std::filesystem::path& p) {
  if (!out) throw DataError("failed writing " + p.string());
}

}  // namespace

void write_report(const std::filesystem::path& dir, const EvaluationResult& r, const EvaluationConfig& cfg) {
  std::filesystem::create_directories(dir);
  {
    const auto p = dir / "losses.csv";
    auto out = csv::open_out(p);
    out << "symbol,model,horizon,subset,loss,value,n,excluded\n";
    for (const auto& x : r.losses) {
      out << x.symbol << ',' << x.model << ',' << x.horizon << ',' << x.subset << ',' << to_string(x.kind) << ','
          << (x.loss.n > 0 ? csv::format(x.loss.value) : "NA") << ',' << x.loss.n << ',' << x.loss.excluded << '\n';
    }
    check(out, p);
  }
  {
    const auto p = dir / "ranks.csv";
    auto out = csv::open_out(p);
    out << "symbol,horizon,loss,model,rank\n";
    for (const auto& x : r.ranks) {
      out << x.symbol << ',' << x.horizon << ',' << to_string(x.kind) << ',' << x.model << ',' << csv::format(x.rank)
          << '\n';
    }
    check(out, p);
  }
  {
    const auto p = dir / "mcs.csv";
    auto out = csv::open_out(p);
    out << "symbol,horizon,loss,model,benchmark,mean_diff,t_stat,p_value,keep_model,keep_benchmark\n";
    for (const auto& x : r.mcs) {
      out << x.symbol << ',' << x.horizon << ',' << to_string(x.kind) << ',' << x.model << ',' << x.benchmark << ','
          << csv::format(x.result.mean_diff) << ',' << csv::format(x.result.t_stat) << ','
          << csv::format(x.result.p_value) << ',' << x.result.keep_i << ',' << x.result.keep_j << '\n';
    }
    check(out, p);
  }
  {
    const auto p = dir / "wilcoxon.csv";
    auto out = csv::open_out(p);
    out << "horizon,loss,row_model,col_model,n,statistic,p_value,p_holm\n";
    for (const auto& x : r.wilcoxon) {
      out << x.horizon << ',' << to_string(x.kind) << ',' << x.row_model << ',' << x.col_model << ',' << x.test.n << ','
          << csv::format(x.test.statistic) << ',' << csv::format(x.test.p_value) << ',' << csv::format(x.p_holm)
          << '\n';
    }
    check(out, p);
  }
  {
    const auto p = dir / "importance.csv";
    auto out = csv::open_out(p);
    out << "model,horizon,feature,percent,stocks\n";
    for (const auto& x : r.importance) {
      out << x.model << ',' << x.horizon << ',' << x.feature << ',' << csv::format(100.0 * x.share) << ','
          << x.stocks << '\n';
    }
    check(out, p);
  }
  {
    const auto p = dir / "report.txt";
    auto out = csv::open_out(p);
    write_text(out, r, cfg);
    check(out, p);
  }
}

}  // namespace volcast
