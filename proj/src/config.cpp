#include "volcast/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"
#include "volcast/parallel.hpp"

namespace volcast {

namespace {

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool parse_string(std::string_view v, std::string& out) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') return false;
  out.assign(v.substr(1, v.size() - 2));
  return out.find('"') == std::string::npos;
}

bool parse_double(std::string_view v, double& out) {
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  return r.ec == std::errc() && r.ptr == v.data() + v.size();
}

template <class Int>
bool parse_int(std::string_view v, Int& out) {
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  return r.ec == std::errc() && r.ptr == v.data() + v.size();
}

// Items of a one-line array, trimmed. False when not an array.
bool parse_array(std::string_view v, std::vector<std::string>& out) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') return false;
  out.clear();
  const auto inner = csv::trim(v.substr(1, v.size() - 2));
  if (inner.empty()) return true;
  std::string item;
  bool quoted = false;
  for (char c : inner) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      out.emplace_back(csv::trim(item));
      item.clear();
    } else {
      item += c;
    }
  }
  out.emplace_back(csv::trim(item));
  for (const auto& s : out)
    if (s.empty()) return false;
  return !quoted;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
  ConfigFile f;
  f.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string body(csv::trim(strip_comment(line)));
    if (body.empty()) continue;
    const std::string where = origin + ":" + std::to_string(n) + ": ";
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) throw ConfigError(where + "malformed section header");
      section = std::string(csv::trim(std::string_view(body).substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key(csv::trim(std::string_view(body).substr(0, eq)));
    const std::string value(csv::trim(std::string_view(body).substr(eq + 1)));
    if (key.empty() || value.empty()) throw ConfigError(where + "empty key or value");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!f.values_.emplace(full, Entry{value, n}).second) throw ConfigError(where + "duplicate key " + full);
  }
  return f;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse(s.str(), path.string());
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

void ConfigFile::bad(const std::string& key, const Entry& e, const std::string& want) const {
  throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + key + " must be " + want + " (got " + e.text + ")");
}

void ConfigFile::get(const std::string& key, std::string& out) {
  if (const auto* e = find(key))
    if (!parse_string(e->text, out)) bad(key, *e, "a quoted string");
}

void ConfigFile::get(const std::string& key, int& out) {
  if (const auto* e = find(key))
    if (!parse_int(e->text, out)) bad(key, *e, "an integer");
}

void ConfigFile::get(const std::string& key, std::uint64_t& out) {
  if (const auto* e = find(key))
    if (!parse_int(e->text, out)) bad(key, *e, "a nonnegative integer");
}

void ConfigFile::get(const std::string& key, double& out) {
  if (const auto* e = find(key))
    if (!parse_double(e->text, out)) bad(key, *e, "a number");
}

void ConfigFile::get(const std::string& key, bool& out) {
  if (const auto* e = find(key)) {
    if (e->text == "true") out = true;
    else if (e->text == "false") out = false;
    else bad(key, *e, "true or false");
  }
}

void ConfigFile::get(const std::string& key, std::vector<int>& out) {
  if (const auto* e = find(key)) {
    std::vector<std::string> items;
    if (!parse_array(e->text, items)) bad(key, *e, "an array of integers");
    std::vector<int> v(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
      if (!parse_int(items[i], v[i])) bad(key, *e, "an array of integers");
    out = std::move(v);
  }
}

void ConfigFile::get(const std::string& key, std::vector<std::string>& out) {
  if (const auto* e = find(key)) {
    std::vector<std::string> items;
    if (!parse_array(e->text, items)) bad(key, *e, "an array of strings");
    std::vector<std::string> v(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
      if (!parse_string(items[i], v[i])) bad(key, *e, "an array of strings");
    out = std::move(v);
  }
}

std::set<std::string> ConfigFile::subsections(const std::string& prefix) const {
  std::set<std::string> out;
  const std::string p = prefix + ".";
  for (const auto& [key, _] : values_) {
    if (key.rfind(p, 0) != 0) continue;
    const auto rest = key.substr(p.size());
    const auto dot = rest.find('.');
    if (dot != std::string::npos) out.insert(rest.substr(0, dot));
  }
  return out;
}

void ConfigFile::check_all_used() const {
  std::string unknown;
  for (const auto& [key, e] : values_) {
    if (used_.count(key)) continue;
    unknown += (unknown.empty() ? "" : ", ") + key + " (line " + std::to_string(e.line) + ")";
  }
  if (!unknown.empty()) throw ConfigError(origin_ + ": unknown key " + unknown);
}

void RunConfig::propagate() {
  if (jobs <= 0) jobs = default_jobs();
  backtest.settings.seed = seed;
  backtest.jobs = jobs;
  evaluation.seed = seed;
  evaluation.jobs = jobs;
  synth.seed = seed;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path q(p);
  return q.is_absolute() ? q : base / q;
}

int parse_clock_key(ConfigFile& f, const std::string& key, int current) {
  std::string text;
  f.get(key, text);
  if (text.empty()) return current;
  try {
    return parse_clock(text);
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

RunConfig parse_run_config(ConfigFile& f, const std::filesystem::path& base_dir) {
  RunConfig c;
  std::string s;

  f.get("run.seed", c.seed);
  f.get("run.jobs", c.jobs);
  f.get("run.synthesize", c.synthesize);
  s = "warning";
  f.get("run.log_level", s);
  if (s == "debug") c.log_level = LogLevel::debug;
  else if (s == "info") c.log_level = LogLevel::info;
  else if (s == "warning") c.log_level = LogLevel::warning;
  else if (s == "error") c.log_level = LogLevel::error;
  else throw ConfigError("run.log_level must be debug, info, warning or error");
  require(c.jobs >= 0, "run.jobs must be nonnegative");

  std::string prices, manifest, sectors, out = c.paths.out.string();
  f.get("paths.prices", prices);
  f.get("paths.manifest", manifest);
  f.get("paths.sectors", sectors);
  f.get("paths.out", out);
  c.paths.prices = resolve(base_dir, prices);
  c.paths.manifest = resolve(base_dir, manifest);
  c.paths.sectors = resolve(base_dir, sectors);
  c.paths.out = resolve(base_dir, out);

  c.session.open_minute = parse_clock_key(f, "session.open", c.session.open_minute);
  c.session.close_minute = parse_clock_key(f, "session.close", c.session.close_minute);
  f.get("session.max_missing_fraction", c.session.max_missing_fraction);
  f.get("session.include_half_days", c.session.include_half_days);
  f.get("session.half_day_gap_minutes", c.session.half_day_gap_minutes);
  require(c.session.close_minute > c.session.open_minute, "session.close must be after session.open");
  require(c.session.max_missing_fraction >= 0.0 && c.session.max_missing_fraction < 1.0,
          "session.max_missing_fraction must lie in [0, 1)");

  f.get("realized.step", c.realized.step);
  f.get("realized.jump_alpha", c.realized.jump_alpha);
  require(c.realized.step >= 1, "realized.step must be positive");
  require(c.realized.jump_alpha > 0.0 && c.realized.jump_alpha < 1.0, "realized.jump_alpha must lie in (0, 1)");

  auto& b = c.backtest;
  auto& m = b.settings;
  f.get("backtest.estimation_window", m.estimation_window);
  f.get("backtest.calibration_window", m.calibration_window);
  f.get("backtest.horizons", b.horizons);
  f.get("backtest.half_life", m.half_life);
  f.get("backtest.omega_refresh", b.omega_refresh);
  f.get("backtest.lasso_grid", m.lasso_grid);
  f.get("backtest.lasso_lo", m.lasso_lo);
  f.get("backtest.lasso_hi", m.lasso_hi);
  f.get("backtest.lasso_refresh", m.lasso_refresh);
  f.get("backtest.csr_k", m.csr_k);
  f.get("backtest.dmse_delta", m.dmse_delta);
  s = m.dmse_log_scale ? "log" : "variance";
  f.get("backtest.dmse_scale", s);
  require(s == "log" || s == "variance", "backtest.dmse_scale must be \"log\" or \"variance\"");
  m.dmse_log_scale = s == "log";
  f.get("backtest.csr_clusters", m.csr_clusters);
  f.get("backtest.csr_trim", m.csr_trim);
  f.get("backtest.rf_trees", m.rf_trees);
  f.get("backtest.rf_z", m.rf_z);
  f.get("backtest.rf_depth", m.rf_depth);
  f.get("backtest.rf_min_leaf", m.rf_min_leaf);
  f.get("backtest.rf_select_every", m.rf_select_every);
  f.get("backtest.rf_refit_every", m.rf_refit_every);
  require(m.estimation_window >= 60, "backtest.estimation_window must be at least 60");
  require(m.calibration_window >= 1, "backtest.calibration_window must be positive");
  require(!b.horizons.empty(), "backtest.horizons must not be empty");
  for (int h : b.horizons) require(h >= 1, "backtest.horizons must be positive");
  require(b.omega_refresh >= 0, "backtest.omega_refresh must be nonnegative");
  require(m.lasso_grid >= 1 && m.lasso_lo > 0.0 && m.lasso_hi >= m.lasso_lo, "backtest lasso grid is invalid");
  require(m.lasso_refresh >= 1, "backtest.lasso_refresh must be positive");
  require(m.csr_k >= 1, "backtest.csr_k must be positive");
  require(m.dmse_delta > 0.0 && m.dmse_delta <= 1.0, "backtest.dmse_delta must lie in (0, 1]");
  require(m.csr_clusters >= 1, "backtest.csr_clusters must be positive");
  require(m.csr_trim >= 0.0 && m.csr_trim < 0.5, "backtest.csr_trim must lie in [0, 0.5)");
  require(m.rf_trees >= 1 && m.rf_min_leaf >= 1, "backtest rf_trees and rf_min_leaf must be positive");
  require(!m.rf_z.empty() && !m.rf_depth.empty(), "backtest rf_z and rf_depth must not be empty");
  for (int z : m.rf_z) require(z >= 1, "backtest.rf_z entries must be positive");
  for (int d : m.rf_depth) require(d >= 0, "backtest.rf_depth entries must be nonnegative");
  require(m.rf_select_every >= 1 && m.rf_refit_every >= 1, "backtest rf cadences must be positive");

  // model registry: a selection of built-in names plus [model.NAME] sections
  std::vector<std::string> names;
  for (const auto& spec : b.models) names.push_back(spec.name);
  f.get("backtest.models", names);
  std::map<std::string, ModelSpec> registry;
  for (const auto& spec : default_models()) registry[spec.name] = spec;
  for (const auto& name : f.subsections("model")) {
    ModelSpec spec = registry.count(name) ? registry[name] : ModelSpec{name, Family::wls, {}, {}};
    std::string family = to_string(spec.family);
    f.get("model." + name + ".family", family);
    spec.family = parse_family(family);
    f.get("model." + name + ".base", spec.base);
    f.get("model." + name + ".candidates", spec.candidates);
    require(!spec.base.empty(), "model." + name + ".base must not be empty");
    registry[name] = spec;
  }
  b.models.clear();
  for (const auto& n : names) {
    const auto it = registry.find(n);
    if (it == registry.end()) throw ConfigError("backtest.models: unknown model " + n);
    b.models.push_back(it->second);
  }
  require(!b.models.empty(), "backtest.models must not be empty");

  auto& e = c.evaluation;
  f.get("evaluation.benchmark", e.benchmark);
  f.get("evaluation.mcs_alpha", e.mcs_alpha);
  f.get("evaluation.mcs_bootstrap", e.mcs_bootstrap);
  f.get("evaluation.decile", e.decile);
  std::vector<std::string> losses;
  for (auto k : e.mcs_losses) losses.push_back(to_string(k));
  f.get("evaluation.mcs_losses", losses);
  e.mcs_losses.clear();
  for (const auto& l : losses) e.mcs_losses.push_back(parse_loss(l));
  require(e.mcs_alpha > 0.0 && e.mcs_alpha < 1.0, "evaluation.mcs_alpha must lie in (0, 1)");
  require(e.mcs_bootstrap >= 1, "evaluation.mcs_bootstrap must be positive");
  require(e.decile > 0.0 && e.decile < 1.0, "evaluation.decile must lie in (0, 1)");
  require(std::any_of(b.models.begin(), b.models.end(), [&](const auto& x) { return x.name == e.benchmark; }),
          "evaluation.benchmark " + e.benchmark + " is not among backtest.models");

  auto& y = c.synth;
  f.get("synth.stocks", y.stocks);
  f.get("synth.days", y.days);
  s.clear();
  f.get("synth.start", s);
  if (!s.empty()) {
    try {
      y.start = Date::parse(s);
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("synth.start: ") + ex.what());
    }
  }
  f.get("synth.mean_variance", y.mean_variance);
  f.get("synth.persistence", y.persistence);
  f.get("synth.vol_of_vol", y.vol_of_vol);
  f.get("synth.jump_intensity", y.jump_intensity);
  f.get("synth.jump_size", y.jump_size);
  f.get("synth.overnight_share", y.overnight_share);
  f.get("synth.attention_persistence", y.attention_persistence);
  f.get("synth.attention_loading", y.attention_loading);
  f.get("synth.loading_spread", y.loading_spread);
  f.get("synth.documents_per_day", y.documents_per_day);
  f.get("synth.announcement_every", y.announcement_every);
  f.get("synth.svi_batch", y.svi_batch);
  f.get("synth.svi_overlap", y.svi_overlap);
  y.validate();

  f.check_all_used();
  c.propagate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  auto f = ConfigFile::load(path);
  return parse_run_config(f, path.parent_path());
}

}  // namespace volcast
