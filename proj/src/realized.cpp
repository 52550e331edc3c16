#include "volcast/realized.hpp"

#include <cmath>
#include <stdexcept>

#include "volcast/csv.hpp"
#include "volcast/distributions.hpp"
#include "volcast/errors.hpp"
#include "volcast/log.hpp"

namespace volcast {

double jump_test(double rv_in, double medrv, double medrq, int n) {
  if (!(rv_in > 0.0) || !(medrv > 0.0)) return 0.0;
  const double ratio = (rv_in - medrv) / rv_in;
  const double denom = std::sqrt(0.96 * std::max(1.0, medrq / (medrv * medrv)));
  return std::sqrt(static_cast<double>(n)) * ratio / denom;
}

double jump_threshold(double alpha) { return normal_quantile(1.0 - alpha); }

JumpSplit jump_split(double rv_in, double medrv, double jt_stat, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("jump_split: alpha must lie in (0, 0.5)");
  if (jt_stat > jump_threshold(alpha)) {
    return {std::max(0.0, rv_in - medrv), medrv};
  }
  return {0.0, rv_in};
}

double whole_day_rv(double rv_on, double rv_in, std::pair<double, double> weights) {
  if (weights.first < 0.0 || weights.second < 0.0) {
    throw std::invalid_argument("whole_day_rv: weights must be nonnegative");
  }
  return weights.first * rv_on + weights.second * rv_in;
}

std::pair<double, double> estimate_on_in_weights(const std::vector<OnInObservation>& history) {
  const auto n = history.size();
  if (n < 60) {
    throw std::invalid_argument("estimate_on_in_weights: need at least 60 observations, got " +
                                std::to_string(n));
  }
  double mu0 = 0.0, mu1 = 0.0, mu2 = 0.0;
  for (const auto& h : history) {
    mu0 += h.proxy;
    mu1 += h.rv_on;
    mu2 += h.rv_in;
  }
  mu0 /= n;
  mu1 /= n;
  mu2 /= n;
  double v1 = 0.0, v2 = 0.0, c12 = 0.0;
  for (const auto& h : history) {
    v1 += (h.rv_on - mu1) * (h.rv_on - mu1);
    v2 += (h.rv_in - mu2) * (h.rv_in - mu2);
    c12 += (h.rv_on - mu1) * (h.rv_in - mu2);
  }
  v1 /= n;
  v2 /= n;
  c12 /= n;
  const double scale = std::max(mu1 * mu1, mu2 * mu2);
  if (!(mu0 > 0.0) || !(mu1 > 0.0) || !(mu2 > 0.0) ||
      (v1 <= 1e-14 * scale && v2 <= 1e-14 * scale)) {
    warn("degenerate overnight/intraday history; using unit weights");
    return {1.0, 1.0};
  }
  // phi minimizes the variance of (1-phi) mu0/mu1 rv_on + phi mu0/mu2 rv_in.
  const double num = mu2 * mu2 * v1 - mu1 * mu2 * c12;
  const double den = mu2 * mu2 * v1 + mu1 * mu1 * v2 - 2.0 * mu1 * mu2 * c12;
  const double phi = den > 1e-12 * mu1 * mu1 * mu2 * mu2 * (v1 / (mu1 * mu1) + v2 / (mu2 * mu2))
                         ? num / den
                         : 0.5;  // variance flat in phi
  const double w1 = std::clamp((1.0 - phi) * mu0 / mu1, 0.0, 5.0);
  const double w2 = std::clamp(phi * mu0 / mu2, 0.0, 5.0);
  return {w1, w2};
}

GridMeasures grid_measures(const TradingDay& day, int step) {
  if (step < 1) throw std::invalid_argument("grid_measures: step must be >= 1");
  GridMeasures g;
  for (int offset = 0; offset < step; ++offset) {
    const Eigen::VectorXd r = intraday_returns(day, step, offset);
    if (r.size() < 3) {
      throw std::invalid_argument("grid_measures: day too short for step " + std::to_string(step));
    }
    if (offset == 0) g.n_returns = static_cast<int>(r.size());
    const auto [pos, neg] = semivariances(r);
    g.rs_pos += pos;
    g.rs_neg += neg;
    g.rv += realized_variance(r);
    g.medrv += med_rv(r);
    g.medrq += med_rq(r);
  }
  const double k = step;
  g.rv /= k;
  g.rs_pos /= k;
  g.rs_neg /= k;
  g.medrv /= k;
  g.medrq /= k;
  return g;
}

double grid_averaged_rv(const TradingDay& day, int step) {
  if (step < 1) throw std::invalid_argument("grid_averaged_rv: step must be >= 1");
  double sum = 0.0;
  for (int offset = 0; offset < step; ++offset) {
    const Eigen::VectorXd r = intraday_returns(day, step, offset);
    if (r.size() == 0) {
      throw std::invalid_argument("grid_averaged_rv: day too short for step " + std::to_string(step));
    }
    sum += realized_variance(r);
  }
  return sum / step;
}

RealizedRecord realized_record(const TradingDay& prev, const TradingDay& cur,
                               const RealizedOptions& options) {
  const GridMeasures g = grid_measures(cur, options.step);
  RealizedRecord rec;
  rec.date = cur.date;
  rec.rv_in = g.rv;
  const double on = overnight_return(prev, cur);
  rec.rv_on = on * on * kAnnualization;
  rec.rv = whole_day_rv(rec.rv_on, rec.rv_in, options.weights);
  const double cc = std::log(cur.close() / prev.close());
  rec.rv_cc = cc * cc * kAnnualization;
  rec.medrv = g.medrv;
  rec.medrq = g.medrq;
  rec.n_returns = g.n_returns;
  rec.jt_stat = jump_test(rec.rv_in, rec.medrv, rec.medrq, rec.n_returns);
  const JumpSplit split = jump_split(rec.rv_in, rec.medrv, rec.jt_stat, options.jump_alpha);
  rec.jc = split.jc;
  rec.cc = split.cc;
  rec.rs_pos = g.rs_pos;
  rec.rs_neg = g.rs_neg;
  rec.sj = signed_jump(rec.rs_pos, rec.rs_neg);
  return rec;
}

std::vector<RealizedRecord> realized_records(const IntradayPanel& panel,
                                             const RealizedOptions& options) {
  std::vector<RealizedRecord> out;
  if (panel.days.size() < 2) return out;
  out.reserve(panel.days.size() - 1);
  for (std::size_t i = 1; i < panel.days.size(); ++i) {
    out.push_back(realized_record(panel.days[i - 1], panel.days[i], options));
  }
  return out;
}

void apply_weights(std::vector<RealizedRecord>& records, std::pair<double, double> weights) {
  for (auto& r : records) r.rv = whole_day_rv(r.rv_on, r.rv_in, weights);
}

namespace {
constexpr const char* kRealizedHeader =
    "date,rv_in,rv_on,rv,rv_cc,medrv,medrq,jt_stat,jc,cc,rs_pos,rs_neg,sj,n_returns";
}

void write_realized(const std::filesystem::path& path, const std::vector<RealizedRecord>& records) {
  auto out = csv::open_out(path);
  out << kRealizedHeader << '\n';
  for (const auto& r : records) {
    out << r.date.to_string() << ',' << csv::format(r.rv_in) << ',' << csv::format(r.rv_on) << ','
        << csv::format(r.rv) << ',' << csv::format(r.rv_cc) << ',' << csv::format(r.medrv) << ',' << csv::format(r.medrq) << ','
        << csv::format(r.jt_stat) << ',' << csv::format(r.jc) << ',' << csv::format(r.cc) << ','
        << csv::format(r.rs_pos) << ',' << csv::format(r.rs_neg) << ',' << csv::format(r.sj)
        << ',' << r.n_returns << '\n';
  }
}

std::vector<RealizedRecord> read_realized(const std::filesystem::path& path) {
  csv::Reader reader(path);
  const auto expected = csv::split(kRealizedHeader);
  if (reader.header() != expected) {
    reader.fail("unexpected realized-measures header");
  }
  std::vector<RealizedRecord> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != expected.size()) reader.fail("wrong field count");
    RealizedRecord r;
    try {
      r.date = Date::parse(f[0]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    double* slots[] = {&r.rv_in, &r.rv_on, &r.rv, &r.rv_cc, &r.medrv, &r.medrq, &r.jt_stat,
                       &r.jc,    &r.cc,    &r.rs_pos, &r.rs_neg, &r.sj};
    for (std::size_t i = 0; i < std::size(slots); ++i) *slots[i] = csv::to_double(reader, f[i + 1]);
    r.n_returns = static_cast<int>(csv::to_long(reader, f[13]));
    if (!out.empty() && !(out.back().date < r.date)) reader.fail("dates not increasing");
    out.push_back(r);
  }
  return out;
}

}  // namespace volcast
