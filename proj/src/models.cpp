#include "volcast/models.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "volcast/csr.hpp"
#include "volcast/errors.hpp"
#include "volcast/forest.hpp"
#include "volcast/log.hpp"
#include "volcast/regression.hpp"

namespace volcast {

std::string to_string(Family f) {
  switch (f) {
    case Family::wls: return "wls";
    case Family::lasso: return "lasso";
    case Family::csr: return "csr";
    case Family::rf: return "rf";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  if (s == "wls") return Family::wls;
  if (s == "lasso") return Family::lasso;
  if (s == "csr") return Family::csr;
  if (s == "rf") return Family::rf;
  throw ConfigError("unknown model family '" + s + "' (expected wls, lasso, csr or rf)");
}

std::vector<ModelSpec> default_models() {
  const std::vector<std::string> har{"rv_d", "rv_w", "rv_m"};
  auto with = [&](std::string extra) {
    auto v = har;
    v.push_back(std::move(extra));
    return v;
  };
  const std::vector<std::string> dw{"rv_d", "rv_w"};
  return {
      {"HAR", Family::wls, har, {}},
      {"HAR-M", Family::wls, with("@interactions"), {}},
      {"CSR-HAR", Family::csr, dw, {"@components"}},
      {"HAR-A", Family::wls, with("@general_attention"), {}},
      {"HAR-S", Family::wls, with("@general_sentiment"), {}},
      {"ALA-A", Family::lasso, dw, {"rv_m", "@attention"}},
      {"ALA-S", Family::lasso, dw, {"rv_m", "@sentiment"}},
      {"CSR-A", Family::csr, dw, {"rv_m", "@attention"}},
      {"CSR-S", Family::csr, dw, {"rv_m", "@sentiment"}},
      {"RF-A", Family::rf, dw, {"rv_m", "@attention"}},
      {"RF-S", Family::rf, dw, {"rv_m", "@sentiment"}},
  };
}

std::vector<std::string> FeatureCatalog::expand(const std::string& token) const {
  if (token.empty() || token[0] != '@') return {token};
  std::vector<std::string> out;
  auto pick = [&](auto&& keep) {
    for (const auto& f : features) {
      if (keep(f)) out.push_back(f.name);
    }
  };
  if (token == "@attention") {
    pick([](const FeatureDef& f) { return f.group == FeatureGroup::attention; });
  } else if (token == "@sentiment") {
    pick([](const FeatureDef& f) { return f.group == FeatureGroup::sentiment; });
  } else if (token == "@dummies") {
    pick([](const FeatureDef& f) { return f.group == FeatureGroup::dummy; });
  } else if (token == "@general_attention") {
    pick([](const FeatureDef& f) { return f.group == FeatureGroup::attention && f.general; });
  } else if (token == "@general_sentiment") {
    pick([](const FeatureDef& f) { return f.group == FeatureGroup::sentiment && f.general; });
  } else if (token == "@interactions") {
    for (const auto& f : features) {
      if (f.group == FeatureGroup::dummy) out.push_back("rv_d*" + f.name);
    }
  } else if (token == "@components") {
    out = component_names();
  } else {
    throw ConfigError("unknown feature group '" + token + "'");
  }
  return out;
}

ModelSpec resolve_model(const ModelSpec& spec, const FeatureCatalog& catalog,
                        const std::vector<std::string>& frame_names) {
  const std::set<std::string> known(frame_names.begin(), frame_names.end());
  auto expand_all = [&](const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& t : tokens) {
      for (auto& name : catalog.expand(t)) {
        if (!known.count(name)) {
          throw ConfigError("model " + spec.name + ": no feature column '" + name + "'");
        }
        if (seen.insert(name).second) out.push_back(std::move(name));
      }
    }
    return out;
  };
  ModelSpec r = spec;
  r.base = expand_all(spec.base);
  r.candidates = expand_all(spec.candidates);
  for (const auto& c : r.candidates) {
    if (std::find(r.base.begin(), r.base.end(), c) != r.base.end()) {
      throw ConfigError("model " + spec.name + ": '" + c + "' is both a base and a candidate feature");
    }
  }
  if (spec.family != Family::wls && r.candidates.empty()) {
    throw ConfigError("model " + spec.name + ": no candidate features");
  }
  if (spec.family == Family::wls && !r.candidates.empty()) {
    throw ConfigError("model " + spec.name + ": wls models take base features only");
  }
  return r;
}

namespace {

Eigen::MatrixXd gather(const FeatureFrame& f, const std::vector<Eigen::Index>& cols, Eigen::Index first,
                       Eigen::Index count, bool intercept) {
  const Eigen::Index off = intercept ? 1 : 0;
  Eigen::MatrixXd m(count, static_cast<Eigen::Index>(cols.size()) + off);
  if (intercept) m.col(0).setOnes();
  for (std::size_t k = 0; k < cols.size(); ++k) {
    m.col(static_cast<Eigen::Index>(k) + off) = f.x.col(cols[k]).segment(first, count);
  }
  return m;
}

Eigen::RowVectorXd gather_row(const FeatureFrame& f, const std::vector<Eigen::Index>& cols, Eigen::Index row,
                              bool intercept) {
  return gather(f, cols, row, 1, intercept).row(0);
}

Eigen::VectorXd weights_for(int n, double half_life) {
  return observation_weights(n, half_life > 0.0 ? half_life : std::numeric_limits<double>::infinity());
}

std::vector<Eigen::Index> indices(const FeatureFrame& f, const std::vector<std::string>& names) {
  try {
    return f.columns(names);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::ordered_json named(const std::vector<std::string>& names, const Eigen::VectorXd& v) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < names.size(); ++k) j[names[k]] = v(static_cast<Eigen::Index>(k));
  return j;
}

// Window bookkeeping shared by the families. Rows [o-E+1, o-h] have
// targets known at origin o.
class Base : public RollingModel {
 public:
  Base(ModelSpec spec, const ModelSettings& s, int h) : spec_(std::move(spec)), s_(s), h_(h) {
    if (h < 1) throw ConfigError("horizon must be positive");
    if (s.estimation_window <= h + 1) throw ConfigError("estimation window too short for horizon");
    if (s.calibration_window < 1) throw ConfigError("calibration window must be positive");
  }

 protected:
  [[nodiscard]] Eigen::Index fit_rows() const { return s_.estimation_window - h_; }
  [[nodiscard]] Eigen::Index fit_first(Eigen::Index o) const { return o - s_.estimation_window + 1; }
  [[nodiscard]] Eigen::VectorXd target(const FeatureFrame& f, Eigen::Index first, Eigen::Index count) const {
    Eigen::VectorXd y = f.target.at(h_).segment(first, count);
    if (!y.allFinite()) throw DataError("missing target inside the estimation window");
    return y;
  }
  void check_origin(Eigen::Index o) const {
    if (fit_first(o) < 0) throw std::logic_error(spec_.name + ": origin before the first full window");
  }
  std::vector<std::string> all_names() const {
    auto v = spec_.base;
    v.insert(v.end(), spec_.candidates.begin(), spec_.candidates.end());
    return v;
  }

  ModelSpec spec_;
  ModelSettings s_;
  int h_;
};

class WlsModel final : public Base {
 public:
  using Base::Base;

  std::optional<Forecast> step(const FeatureFrame& f, Eigen::Index o, bool emit) override {
    if (!emit) return std::nullopt;
    check_origin(o);
    const auto cols = indices(f, spec_.base);
    const auto first = fit_first(o);
    const auto n = fit_rows();
    const Eigen::MatrixXd x = gather(f, cols, first, n, true);
    std::vector<std::string> names{"const"};
    names.insert(names.end(), spec_.base.begin(), spec_.base.end());
    const auto fit = fit_wls(x, target(f, first, n), weights_for(static_cast<int>(n), s_.half_life), names,
                             !warned_);
    if (std::find(fit.dropped.begin(), fit.dropped.end(), true) != fit.dropped.end()) warned_ = true;
    Forecast out;
    out.log = gather_row(f, cols, o, true).dot(fit.beta);
    out.residual_variance = fit.residual_variance;
    out.audit["coef"] = named(names, fit.beta);
    return out;
  }

 private:
  bool warned_ = false;
};

}  // namespace

LinearFit fit_adaptive_lasso(const Eigen::MatrixXd& z, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& w, double lambda_init, double lambda_adap) {
  const auto scale = Standardizer::fit(x, {}, false);
  Eigen::MatrixXd zi(z.rows(), z.cols() + 1);
  zi << Eigen::VectorXd::Ones(z.rows()), z;
  const AdaptiveLasso lasso(zi, scale.transform(x), y, w);
  const auto sol = lasso.solve(lambda_init, lambda_adap);
  LinearFit fit;
  fit.coef = Eigen::VectorXd::Zero(zi.cols() + x.cols());
  fit.coef.head(zi.cols()) = sol.base;
  for (std::size_t k = 0; k < scale.kept().size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    const double c = sol.candidates(j) / scale.sd()(j);
    fit.coef(zi.cols() + scale.kept()[k]) = c;
    fit.coef(0) -= c * scale.mean()(j);
  }
  fit.residual_variance = sol.residual_variance;
  return fit;
}

LassoChoice select_lasso_lambdas(const Eigen::MatrixXd& z_fit, const Eigen::MatrixXd& x_fit,
                                 const Eigen::VectorXd& y_fit, const Eigen::VectorXd& w_fit,
                                 const Eigen::MatrixXd& z_cal, const Eigen::MatrixXd& x_cal,
                                 const Eigen::VectorXd& y_cal, const std::vector<double>& grid_init,
                                 const std::vector<double>& grid_adap) {
  if (grid_init.empty() || grid_adap.empty()) throw std::invalid_argument("select_lasso_lambdas: empty grid");
  if (y_cal.size() == 0) throw std::invalid_argument("select_lasso_lambdas: empty calibration segment");
  const auto scale = Standardizer::fit(x_fit, {}, false);
  Eigen::MatrixXd zi(z_fit.rows(), z_fit.cols() + 1);
  zi << Eigen::VectorXd::Ones(z_fit.rows()), z_fit;
  Eigen::MatrixXd zc(z_cal.rows(), z_cal.cols() + 1);
  zc << Eigen::VectorXd::Ones(z_cal.rows()), z_cal;
  const Eigen::MatrixXd xc = scale.transform(x_cal);
  const AdaptiveLasso lasso(zi, scale.transform(x_fit), y_fit, w_fit);

  auto ascending = [](std::vector<double> g) {
    std::sort(g.begin(), g.end());
    return g;
  };
  const auto gi = ascending(grid_init);
  const auto ga = ascending(grid_adap);
  LassoChoice best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (double li : gi) {
    const Eigen::VectorXd ridge = ridge_solve(lasso.problem(), li);
    Eigen::VectorXd warm;
    for (double la : ga) {
      const auto sol = lasso.solve_stage2(ridge, la, warm);
      warm = sol.candidates;
      const double mse = (y_cal - zc * sol.base - xc * sol.candidates).squaredNorm() / static_cast<double>(y_cal.size());
      const bool better = mse < best.mse ||
                          (mse == best.mse && (la > best.lambda_adap || (la == best.lambda_adap && li > best.lambda_init)));
      if (better) best = {li, la, mse};
    }
  }
  return best;
}

std::vector<RfSetting> rf_grid(const std::vector<int>& z, const std::vector<int>& depth) {
  std::vector<RfSetting> g;
  for (int a : z)
    for (int d : depth) g.push_back({a, d});
  return g;
}

std::size_t select_rf_setting(const std::vector<RfSetting>& grid, const std::vector<double>& mse) {
  if (grid.empty() || grid.size() != mse.size()) throw std::invalid_argument("select_rf_setting: size mismatch");
  auto depth_key = [](int d) { return d == 0 ? std::numeric_limits<int>::max() : d; };
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto& a = grid[i];
    const auto& b = grid[best];
    if (mse[i] < mse[best] ||
        (mse[i] == mse[best] && (a.z < b.z || (a.z == b.z && depth_key(a.depth) < depth_key(b.depth))))) {
      best = i;
    }
  }
  return best;
}

namespace {

class LassoModel final : public Base {
 public:
  using Base::Base;

  std::optional<Forecast> step(const FeatureFrame& f, Eigen::Index o, bool emit) override {
    if (!emit) return std::nullopt;
    check_origin(o);
    const auto zc = indices(f, spec_.base);
    const auto xc = indices(f, spec_.candidates);
    const auto n = fit_rows();
    const auto w = weights_for(static_cast<int>(n), s_.half_life);
    if (!chosen_ || o - chosen_at_ >= s_.lasso_refresh) {
      // fit on the window ending where the calibration segment starts
      const Eigen::Index c0 = o - h_ - s_.calibration_window + 1;
      const Eigen::Index ncal = s_.calibration_window;
      if (fit_first(c0) < 0) throw std::logic_error(spec_.name + ": calibration window starts too early");
      const auto grid = log_grid(s_.lasso_lo * static_cast<double>(n), s_.lasso_hi * static_cast<double>(n),
                                 s_.lasso_grid);
      choice_ = select_lasso_lambdas(gather(f, zc, fit_first(c0), n, false), gather(f, xc, fit_first(c0), n, false),
                                     target(f, fit_first(c0), n), w, gather(f, zc, c0, ncal, false),
                                     gather(f, xc, c0, ncal, false), target(f, c0, ncal), grid, grid);
      chosen_ = true;
      chosen_at_ = o;
    }
    const auto first = fit_first(o);
    const auto fit = fit_adaptive_lasso(gather(f, zc, first, n, false), gather(f, xc, first, n, false),
                                        target(f, first, n), w, choice_.lambda_init, choice_.lambda_adap);
    Eigen::RowVectorXd row(1 + zc.size() + xc.size());
    row << 1.0, gather_row(f, zc, o, false), gather_row(f, xc, o, false);
    Forecast out;
    out.log = row.dot(fit.coef);
    out.residual_variance = fit.residual_variance;
    std::vector<std::string> names{"const"};
    const auto rest = all_names();
    names.insert(names.end(), rest.begin(), rest.end());
    out.audit["lambda_init"] = choice_.lambda_init;
    out.audit["lambda_adap"] = choice_.lambda_adap;
    out.audit["coef"] = named(names, fit.coef);
    return out;
  }

 private:
  bool chosen_ = false;
  Eigen::Index chosen_at_ = 0;
  LassoChoice choice_;
};

class CsrModel final : public Base {
 public:
  CsrModel(ModelSpec spec, const ModelSettings& s, int h) : Base(std::move(spec), s, h) {
    const int p = static_cast<int>(spec_.candidates.size());
    if (p < s.csr_k) {
      throw ConfigError("model " + spec_.name + ": needs at least " + std::to_string(s.csr_k) + " candidates");
    }
    subsets_ = enumerate_subsets(p, s.csr_k);
  }

  [[nodiscard]] Eigen::Index warmup_origin(Eigen::Index first_forecast) const override {
    return first_forecast - h_ - s_.calibration_window + 1;
  }

  std::optional<Forecast> step(const FeatureFrame& f, Eigen::Index o, bool emit) override {
    check_origin(o);
    if (last_ >= 0 && o != last_ + 1) throw std::logic_error(spec_.name + ": origins must be consecutive");
    last_ = o;
    const auto cols = indices(f, all_names());
    const auto nb = static_cast<Eigen::Index>(spec_.base.size()) + 1;
    const auto first = fit_first(o);
    const auto n = fit_rows();
    const Eigen::MatrixXd x = gather(f, cols, first, n, true);
    const Eigen::VectorXd y = target(f, first, n);
    const Eigen::VectorXd w = weights_for(static_cast<int>(n), s_.half_life);
    const Eigen::MatrixXd xw = x.transpose() * w.asDiagonal();
    const Eigen::MatrixXd gram = xw * x;
    const Eigen::VectorXd cross = xw * y;
    const double yy = w.dot(y.cwiseAbs2());
    const double wsum = w.sum();
    const Eigen::RowVectorXd row = gather_row(f, cols, o, true);

    const auto m = subsets_.size();
    Eigen::VectorXd forecasts(static_cast<Eigen::Index>(m));
    Eigen::VectorXd resvar(static_cast<Eigen::Index>(m));
    std::vector<Eigen::Index> sel(static_cast<std::size_t>(nb + s_.csr_k));
    for (Eigen::Index k = 0; k < nb; ++k) sel[static_cast<std::size_t>(k)] = k;
    for (std::size_t j = 0; j < m; ++j) {
      for (int q = 0; q < s_.csr_k; ++q) {
        sel[static_cast<std::size_t>(nb + q)] = nb + subsets_[j][static_cast<std::size_t>(q)];
      }
      const Eigen::MatrixXd g = gram(sel, sel);
      const Eigen::VectorXd c = cross(sel);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
      Eigen::VectorXd beta;
      if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 1e-10 * g.diagonal().maxCoeff()) {
        beta = ldlt.solve(c);
      } else {
        beta = g.completeOrthogonalDecomposition().solve(c);
      }
      forecasts(static_cast<Eigen::Index>(j)) = row(sel).dot(beta);
      resvar(static_cast<Eigen::Index>(j)) = std::max(0.0, (yy - 2.0 * beta.dot(c) + beta.dot(g * beta)) / wsum);
    }
    history_.push_back({o, forecasts});
    const auto keep = static_cast<std::size_t>(s_.calibration_window + h_);
    while (history_.size() > keep) history_.pop_front();
    if (!emit) return std::nullopt;

    // errors of the S most recent origins whose targets are known at o
    const Eigen::Index c_first = o - h_ - s_.calibration_window + 1;
    if (history_.front().origin > c_first) {
      throw std::logic_error(spec_.name + ": missing submodel history before origin " + std::to_string(o));
    }
    const Eigen::VectorXd& tgt = f.target.at(h_);
    Eigen::MatrixXd errors(s_.calibration_window, static_cast<Eigen::Index>(m));
    for (const auto& [origin, past] : history_) {
      if (origin < c_first || origin > o - h_) continue;
      if (s_.dmse_log_scale) {
        errors.row(origin - c_first) = (tgt(origin) - past.array()).matrix().transpose();
      } else {
        errors.row(origin - c_first) = (std::exp(tgt(origin)) - past.array().exp()).matrix().transpose();
      }
    }
    Eigen::VectorXd weights(static_cast<Eigen::Index>(m));
    for (Eigen::Index j = 0; j < weights.size(); ++j) weights(j) = dmse_weight(errors.col(j), s_.dmse_delta);
    const auto comb = csr_combine(forecasts, weights, s_.csr_clusters, s_.csr_trim);

    Forecast out;
    out.log = comb.forecast;
    double rv = 0.0;
    nlohmann::ordered_json chosen = nlohmann::ordered_json::array();
    for (int j : comb.selected) {
      rv += resvar(j);
      nlohmann::ordered_json names = nlohmann::ordered_json::array();
      for (int q : subsets_[static_cast<std::size_t>(j)]) names.push_back(spec_.candidates[static_cast<std::size_t>(q)]);
      chosen.push_back(std::move(names));
    }
    out.residual_variance = rv / static_cast<double>(comb.selected.size());
    out.audit["submodels"] = m;
    out.audit["selected"] = std::move(chosen);
    return out;
  }

 private:
  struct Past {
    Eigen::Index origin;
    Eigen::VectorXd forecasts;
  };
  std::vector<std::vector<int>> subsets_;
  std::deque<Past> history_;
  Eigen::Index last_ = -1;
};

class ForestModel final : public Base {
 public:
  ForestModel(ModelSpec spec, const ModelSettings& s, int h) : Base(std::move(spec), s, h) {
    if (s.rf_z.empty() || s.rf_depth.empty()) throw ConfigError("random forest grid is empty");
    grid_ = rf_grid(s.rf_z, s.rf_depth);
    const int p = static_cast<int>(spec_.candidates.size());
    for (auto& g : grid_) {
      if (g.z > p) {
        if (!clamp_warned_) warn("model " + spec_.name + ": z=" + std::to_string(g.z) + " exceeds the " +
                                 std::to_string(p) + " candidates, clamping");
        clamp_warned_ = true;
        g.z = p;
      }
    }
    for (std::size_t k = 0; k < spec_.base.size(); ++k) forced_.push_back(static_cast<int>(k));
    tag_ = spec_.name + "/h" + std::to_string(h);
  }

  std::optional<Forecast> step(const FeatureFrame& f, Eigen::Index o, bool emit) override {
    if (!emit) return std::nullopt;
    check_origin(o);
    const auto cols = indices(f, all_names());
    const auto n = fit_rows();
    if (!selected_ || o - selected_at_ >= s_.rf_select_every) {
      const Eigen::Index c0 = o - h_ - s_.calibration_window + 1;
      if (fit_first(c0) < 0) throw std::logic_error(spec_.name + ": calibration window starts too early");
      const Eigen::MatrixXd x = gather(f, cols, fit_first(c0), n, false);
      const Eigen::VectorXd y = target(f, fit_first(c0), n);
      const Eigen::MatrixXd xc = gather(f, cols, c0, s_.calibration_window, false);
      const Eigen::VectorXd yc = target(f, c0, s_.calibration_window);
      std::vector<double> mse;
      for (const auto& g : grid_) {
        RandomForest rf;
        rf.fit(x, y, params(g), task_seed(s_.seed, tag_, static_cast<long>(c0)));
        double se = 0.0;
        for (Eigen::Index i = 0; i < xc.rows(); ++i) se += std::pow(yc(i) - rf.predict(xc.row(i)), 2);
        mse.push_back(se / static_cast<double>(xc.rows()));
      }
      const auto pick = grid_[select_rf_setting(grid_, mse)];
      if (!selected_ || pick.z != setting_.z || pick.depth != setting_.depth) forest_.reset();
      setting_ = pick;
      selected_ = true;
      selected_at_ = o;
    }
    if (!forest_ || o - fitted_at_ >= s_.rf_refit_every) {
      const auto first = fit_first(o);
      forest_ = std::make_unique<RandomForest>();
      forest_->fit(gather(f, cols, first, n, false), target(f, first, n), params(setting_),
                   task_seed(s_.seed, tag_, static_cast<long>(o)));
      fitted_at_ = o;
    }
    Forecast out;
    out.log = forest_->predict(gather_row(f, cols, o, false));
    out.residual_variance = forest_->oob_mse();
    out.audit["z"] = setting_.z;
    out.audit["depth"] = setting_.depth;
    out.audit["trees"] = s_.rf_trees;
    out.audit["fitted_at"] = fitted_at_;
    return out;
  }

 private:
  ForestParams params(const RfSetting& g) const {
    return {s_.rf_trees, g.z, g.depth, s_.rf_min_leaf, forced_};
  }

  std::vector<RfSetting> grid_;
  std::vector<int> forced_;
  std::string tag_;
  bool clamp_warned_ = false;
  bool selected_ = false;
  Eigen::Index selected_at_ = 0;
  RfSetting setting_;
  std::unique_ptr<RandomForest> forest_;
  Eigen::Index fitted_at_ = 0;
};

}  // namespace

std::unique_ptr<RollingModel> make_rolling_model(const ModelSpec& spec, const ModelSettings& settings, int horizon) {
  switch (spec.family) {
    case Family::wls: return std::make_unique<WlsModel>(spec, settings, horizon);
    case Family::lasso: return std::make_unique<LassoModel>(spec, settings, horizon);
    case Family::csr: return std::make_unique<CsrModel>(spec, settings, horizon);
    case Family::rf: return std::make_unique<ForestModel>(spec, settings, horizon);
  }
  throw std::logic_error("unknown family");
}

}  // namespace volcast
