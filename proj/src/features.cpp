#include "volcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"
#include "volcast/log.hpp"

namespace volcast {

double log_transform(double x) {
  if (x < 0.0 || std::isnan(x)) throw std::invalid_argument("log_transform: negative input");
  return x > 0.0 ? std::log(x) : 0.0;
}

double signed_jump_transform(double sj) {
  if (sj > 0.0) return std::log(sj);
  if (sj < 0.0) return -std::log(-sj);
  return 0.0;
}

namespace {

template <class Get>
double window_mean(Get&& get, std::size_t index, int horizon) {
  double s = 0.0;
  for (std::size_t k = index + 1 - static_cast<std::size_t>(horizon); k <= index; ++k) s += get(k);
  return s / horizon;
}

}  // namespace

double horizon_average(std::span<const double> series, int horizon, std::size_t index, bool signed_jump) {
  if (horizon < 1) throw std::invalid_argument("horizon_average: horizon must be positive");
  if (index >= series.size() || index + 1 < static_cast<std::size_t>(horizon)) {
    throw std::out_of_range("horizon_average: insufficient history");
  }
  const double m = window_mean([&](std::size_t k) { return series[k]; }, index, horizon);
  return signed_jump ? signed_jump_transform(m) : log_transform(m);
}

Eigen::VectorXd observation_weights(int n, double half_life) {
  if (n < 1) throw std::invalid_argument("observation_weights: n must be positive");
  if (!(half_life > 0.0)) throw std::invalid_argument("observation_weights: half-life must be positive");
  if (std::isinf(half_life)) return Eigen::VectorXd::Ones(n);
  Eigen::VectorXd w(n);
  for (int t = 1; t <= n; ++t) w(t - 1) = std::exp(-std::numbers::ln2 * (n - t) / half_life);
  return w * (n / w.sum());
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x, const std::vector<std::string>& names, bool report) {
  Standardizer s;
  if (x.rows() < 2) throw std::invalid_argument("Standardizer: need at least two rows");
  std::vector<double> means, sds;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double m = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - m).square().mean());
    if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) {
      const std::string label = j < static_cast<Eigen::Index>(names.size()) ? names[j] : std::to_string(j);
      if (report) warn("dropping constant column '" + label + "' before standardization");
      continue;
    }
    s.kept_.push_back(j);
    means.push_back(m);
    sds.push_back(sd);
  }
  s.mean_ = Eigen::Map<Eigen::RowVectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
  s.sd_ = Eigen::Map<Eigen::RowVectorXd>(sds.data(), static_cast<Eigen::Index>(sds.size()));
  return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(kept_.size()));
  for (std::size_t k = 0; k < kept_.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    out.col(j) = (x.col(kept_[k]).array() - mean_(j)) / sd_(j);
  }
  return out;
}

Eigen::RowVectorXd Standardizer::transform_row(const Eigen::RowVectorXd& x) const {
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(kept_.size()));
  for (std::size_t k = 0; k < kept_.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    out(j) = (x(kept_[k]) - mean_(j)) / sd_(j);
  }
  return out;
}

Eigen::Index FeatureFrame::column(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("feature frame has no column '" + name + "'");
  return it - names.begin();
}

std::vector<Eigen::Index> FeatureFrame::columns(const std::vector<std::string>& wanted) const {
  std::vector<Eigen::Index> out;
  out.reserve(wanted.size());
  for (const auto& n : wanted) out.push_back(column(n));
  return out;
}

const std::vector<std::string>& component_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const char* c : {"sj", "jc", "cc", "rsn", "rsp"}) {
      for (const char* h : {"d", "w", "m"}) v.push_back(std::string(c) + "_" + h);
    }
    return v;
  }();
  return names;
}

FeatureFrame build_frame(const StockData& data, std::pair<double, double> weights,
                         const std::vector<int>& horizons) {
  const auto& rec = data.records;
  const std::size_t n = rec.size();
  if (static_cast<std::size_t>(data.extra.rows()) != n && data.extra.cols() > 0) {
    throw std::invalid_argument("build_frame: feature rows do not match records");
  }
  FeatureFrame f;
  const std::size_t rows = n > kWarmup ? n - kWarmup : 0;
  std::vector<double> rv(n);
  for (std::size_t t = 0; t < n; ++t) rv[t] = whole_day_rv(rec[t].rv_on, rec[t].rv_in, weights);

  auto add = [&](std::string name, std::string source) {
    f.names.push_back(std::move(name));
    f.sources.push_back(std::move(source));
  };
  for (const char* h : {"rv_d", "rv_w", "rv_m"}) add(h, "realized:rv");
  for (const auto& c : component_names()) add(c, "realized:component");
  std::vector<std::size_t> dummies;
  for (std::size_t k = 0; k < data.extra_names.size(); ++k) {
    add(data.extra_names[k], data.extra_is_dummy[k] ? "feature:dummy" : "feature");
    if (data.extra_is_dummy[k]) dummies.push_back(k);
  }
  for (auto k : dummies) add("rv_d*" + data.extra_names[k], "interaction");

  f.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(f.names.size()));
  const int spans[] = {1, 5, 22};
  using Field = double RealizedRecord::*;
  const Field fields[] = {&RealizedRecord::sj, &RealizedRecord::jc, &RealizedRecord::cc,
                          &RealizedRecord::rs_neg, &RealizedRecord::rs_pos};
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t t = i + kWarmup;
    const auto r = static_cast<Eigen::Index>(i);
    f.dates.push_back(rec[t].date);
    Eigen::Index c = 0;
    for (int h : spans) {
      f.x(r, c++) = log_transform(window_mean([&](std::size_t k) { return rv[k]; }, t, h));
    }
    for (std::size_t q = 0; q < std::size(fields); ++q) {
      for (int h : spans) {
        const double m = window_mean([&](std::size_t k) { return rec[k].*fields[q]; }, t, h);
        f.x(r, c++) = q == 0 ? signed_jump_transform(m) : log_transform(std::max(0.0, m));
      }
    }
    for (std::size_t k = 0; k < data.extra_names.size(); ++k) {
      const double v = data.extra(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
      if (data.extra_is_dummy[k]) {
        f.x(r, c++) = v;
      } else {
        if (v < 0.0 || !std::isfinite(v)) {
          throw DataError(data.symbol + " " + rec[t].date.to_string() + ": feature '" +
                          data.extra_names[k] + "' is negative or not finite");
        }
        f.x(r, c++) = log_transform(v);
      }
    }
    for (auto k : dummies) {
      f.x(r, c++) = f.x(r, 0) * data.extra(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
    }
  }
  for (int h : horizons) {
    if (h < 1) throw std::invalid_argument("build_frame: horizon must be positive");
    Eigen::VectorXd y = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(rows),
                                                  std::numeric_limits<double>::quiet_NaN());
    Eigen::VectorXd raw = y;
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t t = i + kWarmup;
      if (t + static_cast<std::size_t>(h) >= n) break;
      const double m = window_mean([&](std::size_t k) { return rv[k]; }, t + static_cast<std::size_t>(h), h);
      raw(static_cast<Eigen::Index>(i)) = m;
      y(static_cast<Eigen::Index>(i)) = log_transform(m);
    }
    f.target[h] = std::move(y);
    f.realized[h] = std::move(raw);
  }
  return f;
}

std::pair<double, double> window_weights(const std::vector<RealizedRecord>& records, std::size_t first,
                                         std::size_t last) {
  if (last >= records.size() || first > last) throw std::out_of_range("window_weights: bad range");
  std::vector<OnInObservation> h;
  h.reserve(last - first + 1);
  for (std::size_t t = first; t <= last; ++t) h.push_back({records[t].rv_on, records[t].rv_in, records[t].rv_cc});
  return estimate_on_in_weights(h);
}

StockData join_features(const std::string& symbol, std::vector<RealizedRecord> records,
                        const std::vector<Date>& table_dates, const std::vector<std::string>& names,
                        const Eigen::MatrixXd& table_values, const std::vector<bool>& is_dummy) {
  if (names.size() != is_dummy.size()) throw std::invalid_argument("join_features: size mismatch");
  StockData d;
  d.symbol = symbol;
  d.extra_names = names;
  d.extra_is_dummy = is_dummy;
  d.extra.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto it = std::lower_bound(table_dates.begin(), table_dates.end(), records[i].date);
    if (it == table_dates.end() || *it != records[i].date) {
      throw DataError(symbol + ": no feature row for " + records[i].date.to_string());
    }
    if (!names.empty()) d.extra.row(static_cast<Eigen::Index>(i)) = table_values.row(it - table_dates.begin());
  }
  d.records = std::move(records);
  return d;
}

void write_frame(const std::filesystem::path& path, const FeatureFrame& frame) {
  auto out = csv::open_out(path);
  out << "date";
  for (const auto& n : frame.names) out << ',' << n;
  for (const auto& [h, _] : frame.target) out << ",target_h" << h << ",realized_h" << h;
  out << '\n';
  for (Eigen::Index i = 0; i < frame.rows(); ++i) {
    out << frame.dates[static_cast<std::size_t>(i)].to_string();
    for (Eigen::Index j = 0; j < frame.x.cols(); ++j) out << ',' << csv::format(frame.x(i, j));
    for (const auto& [h, y] : frame.target) {
      out << ',' << csv::format(y(i)) << ',' << csv::format(frame.realized.at(h)(i));
    }
    out << '\n';
  }
}

void write_column_manifest(const std::filesystem::path& path, const FeatureFrame& frame) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < frame.names.size(); ++k) {
    j.push_back({{"name", frame.names[k]}, {"source", frame.sources[k]}});
  }
  csv::open_out(path) << j.dump(2) << '\n';
}

}  // namespace volcast
