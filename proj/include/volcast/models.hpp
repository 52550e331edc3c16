#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include "volcast/attention.hpp"
#include "volcast/features.hpp"

namespace volcast {

enum class Family { wls, lasso, csr, rf };

std::string to_string(Family f);
Family parse_family(const std::string& s);

/// A forecasting model. Feature lists may hold column names or group
/// tokens (@attention, @sentiment, @dummies, @components,
/// @general_attention, @general_sentiment, @interactions). The intercept is
/// implicit for the linear families.
struct ModelSpec {
  std::string name;
  Family family = Family::wls;
  std::vector<std::string> base;
  std::vector<std::string> candidates;
};

/// The eleven models of the study.
std::vector<ModelSpec> default_models();

/// Which extra features are attention, sentiment or dummies, and which of
/// them are the general (stock-market) measures.
struct FeatureCatalog {
  std::vector<FeatureDef> features;

  static FeatureCatalog from_manifest(const FeatureManifest& m) { return {m.features}; }
  [[nodiscard]] std::vector<std::string> expand(const std::string& token) const;
};

/// Expands tokens against the catalog, checks every name against the frame
/// columns and the model invariants. Throws ConfigError.
ModelSpec resolve_model(const ModelSpec& spec, const FeatureCatalog& catalog,
                        const std::vector<std::string>& frame_names);

struct ModelSettings {
  int estimation_window = 1000;
  int calibration_window = 500;
  double half_life = 125.0;  // observation weights; <= 0 or inf for equal weights
  // adaptive LASSO
  int lasso_grid = 20;
  double lasso_lo = 1e-4;  // times the number of estimation rows
  double lasso_hi = 1e2;
  int lasso_refresh = 125;
  // complete subset regression
  int csr_k = 2;
  double dmse_delta = 0.95;
  bool dmse_log_scale = true;  // false: errors of exp(log forecasts)
  int csr_clusters = 5;
  double csr_trim = 0.25;
  // random forest
  int rf_trees = 500;
  std::vector<int> rf_z{8, 16, 32};
  std::vector<int> rf_depth{6, 12, 0};  // 0 = unlimited
  int rf_min_leaf = 10;
  int rf_select_every = 125;
  int rf_refit_every = 1;
  std::uint64_t seed = 0;
};

/// Linear model on [1, z..., x...] with the candidates reported on their
/// original scale.
struct LinearFit {
  Eigen::VectorXd coef;  // intercept first
  double residual_variance = 0.0;
};

/// Adaptive LASSO with unpenalized intercept and base columns `z` (no
/// intercept column) and penalized candidates `x`, standardized on the
/// fitting rows.
LinearFit fit_adaptive_lasso(const Eigen::MatrixXd& z, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& w, double lambda_init, double lambda_adap);

struct LassoChoice {
  double lambda_init = 0.0;
  double lambda_adap = 0.0;
  double mse = 0.0;
};

/// Grid search minimizing squared error on the calibration rows of fits
/// made on the fitting rows. Ties go to the larger lambda_adap, then the
/// larger lambda_init.
LassoChoice select_lasso_lambdas(const Eigen::MatrixXd& z_fit, const Eigen::MatrixXd& x_fit,
                                 const Eigen::VectorXd& y_fit, const Eigen::VectorXd& w_fit,
                                 const Eigen::MatrixXd& z_cal, const Eigen::MatrixXd& x_cal,
                                 const Eigen::VectorXd& y_cal, const std::vector<double>& grid_init,
                                 const std::vector<double>& grid_adap);

struct RfSetting {
  int z = 8;
  int depth = 6;  // 0 = unlimited
};

/// All (z, depth) pairs, z outer.
std::vector<RfSetting> rf_grid(const std::vector<int>& z, const std::vector<int>& depth);

/// Index of the setting with the smallest error; ties go to the smallest z,
/// then the smallest depth (unlimited counts as largest).
std::size_t select_rf_setting(const std::vector<RfSetting>& grid, const std::vector<double>& mse);

struct Forecast {
  double log = 0.0;                // point forecast of the log target
  double residual_variance = 0.0;  // for retransformation
  nlohmann::ordered_json audit;
};

/// Rolling forecaster for one stock, model and horizon. `step` is called
/// for consecutive origins (frame rows); models that keep out-of-sample
/// histories need every origin from warmup_origin() on. A forecast is
/// returned only when `emit` is set.
class RollingModel {
 public:
  virtual ~RollingModel() = default;
  virtual std::optional<Forecast> step(const FeatureFrame& frame, Eigen::Index origin, bool emit) = 0;

  /// Earliest origin the model needs to see.
  [[nodiscard]] virtual Eigen::Index warmup_origin(Eigen::Index first_forecast) const { return first_forecast; }
};

/// `spec` must be resolved.
std::unique_ptr<RollingModel> make_rolling_model(const ModelSpec& spec, const ModelSettings& settings, int horizon);

}  // namespace volcast
