#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "volcast/attention.hpp"
#include "volcast/market_data.hpp"

namespace volcast {

/// Synthetic market. Daily intraday log-variance of stock i is
///   h(t) = mu + x(t) + beta_i a(t-1),  x(t) = phi x(t-1) + vol_of_vol e(t)
/// where a is a unit-variance AR(1) latent attention series shared by all
/// stocks. Only the FOMC document count and the FOMC negative tone observe
/// a; every other feature is noise. mu is set so that E exp(h) matches
/// mean_variance.
struct SynthConfig {
  int stocks = 5;
  int days = 1600;                   // trading days with prices
  Date start = Date::from_ymd(2015, 1, 5);
  double mean_variance = 400.0;      // average intraday integrated variance, annualized percent^2
  double persistence = 0.98;
  double vol_of_vol = 0.15;
  double jump_intensity = 0.02;      // expected jumps per day
  double jump_size = 3.0;            // in daily intraday standard deviations
  double overnight_share = 0.2;      // share of whole-day variance realized overnight
  double attention_persistence = 0.5;
  double attention_loading = 0.4;    // mean beta_i
  double loading_spread = 0.1;       // beta_i uniform on mean +- spread
  double documents_per_day = 12.0;   // mean per topic
  int announcement_every = 21;       // trading days between releases of one variable
  int svi_batch = 270;
  int svi_overlap = 10;
  std::uint64_t seed = 0;

  /// Throws ConfigError on invalid values.
  void validate() const;
};

struct SimulatedStock {
  IntradayPanel panel;
  std::vector<double> integrated_variance;  // true intraday variance per day, annualized
  std::vector<Date> jump_days;
  std::vector<double> attention;  // latent series, per trading day
};

/// Weekday calendar of `config.days` days from `config.start`.
std::vector<Date> synth_calendar(const SynthConfig& config);

/// Latent attention per trading day; identical for every stock.
std::vector<double> latent_attention(const SynthConfig& config);

std::string synth_symbol(int index);

/// Stock `index` of the market. Deterministic in (config, index).
SimulatedStock simulate_stock(const SynthConfig& config, int index);

/// Daily ground-truth series cut into max-100 normalized, rounded batches
/// of `length` days overlapping by `overlap` days.
std::vector<SviBatch> make_svi_batches(const std::vector<double>& truth, Date start, int length, int overlap);

/// Writes the raw feature inputs (SVI batches, pageviews, documents,
/// schedule), manifest.json and sectors.csv into `dir`.
void simulate_feature_files(const SynthConfig& config, const std::filesystem::path& dir);

/// Names of the features driven by the latent attention series.
inline const std::vector<std::string>& informative_features() {
  static const std::vector<std::string> v{"T_FOMC", "TWN_FOMC"};
  return v;
}

/// Feature inputs plus one price file per stock under `dir`/prices.
void write_synthetic_market(const SynthConfig& config, const std::filesystem::path& dir, int jobs = 1);

}  // namespace volcast
