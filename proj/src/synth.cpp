#include "volcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"
#include "volcast/forest.hpp"
#include "volcast/parallel.hpp"
#include "volcast/realized.hpp"

namespace volcast {

namespace {

constexpr int kSessionMinutes = 390;

const std::vector<std::string>& macro_topics() {
  static const std::vector<std::string> v{"FOMC", "NFP", "CPI", "GDP", "PPI", "RETAIL", "ISM"};
  return v;
}
const std::vector<std::string>& scheduled() {
  static const std::vector<std::string> v{"FOMC", "NFP", "CPI"};
  return v;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Unit-variance AR(1) path.
std::vector<double> ar1(std::mt19937_64& rng, std::size_t n, double rho) {
  std::normal_distribution<double> z(0.0, 1.0);
  const double innov = std::sqrt(1.0 - rho * rho);
  std::vector<double> out(n);
  double a = z(rng);
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) a = rho * a + innov * z(rng);
    out[t] = a;
  }
  return out;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void SynthConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("synth: " + what);
  };
  require(stocks >= 1, "stocks must be positive");
  require(days >= 2, "days must be at least 2");
  require(mean_variance > 0.0, "mean_variance must be positive");
  require(persistence >= 0.0 && persistence < 1.0, "persistence must lie in [0, 1)");
  require(vol_of_vol >= 0.0, "vol_of_vol must be nonnegative");
  require(jump_intensity >= 0.0, "jump_intensity must be nonnegative");
  require(jump_size >= 0.0, "jump_size must be nonnegative");
  require(overnight_share >= 0.0 && overnight_share < 1.0, "overnight_share must lie in [0, 1)");
  require(attention_persistence >= 0.0 && attention_persistence < 1.0, "attention_persistence must lie in [0, 1)");
  require(loading_spread >= 0.0, "loading_spread must be nonnegative");
  require(documents_per_day > 0.0, "documents_per_day must be positive");
  require(announcement_every >= 1, "announcement_every must be positive");
  require(svi_batch > svi_overlap && svi_overlap >= 1, "svi_batch must exceed svi_overlap >= 1");
}

std::vector<Date> synth_calendar(const SynthConfig& config) {
  std::vector<Date> out;
  Date d = config.start;
  while (static_cast<int>(out.size()) < config.days) {
    if (!d.is_weekend()) out.push_back(d);
    d = d + 1;
  }
  return out;
}

std::vector<double> latent_attention(const SynthConfig& config) {
  std::mt19937_64 rng(task_seed(config.seed, "synth/attention", 0));
  return ar1(rng, static_cast<std::size_t>(config.days), config.attention_persistence);
}

std::string synth_symbol(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "STK%03d", index + 1);
  return buf;
}

SimulatedStock simulate_stock(const SynthConfig& config, int index) {
  config.validate();
  const auto calendar = synth_calendar(config);
  SimulatedStock out;
  out.attention = latent_attention(config);
  out.panel.symbol = synth_symbol(index);
  out.panel.session_minutes = kSessionMinutes + 1;

  std::mt19937_64 rng(task_seed(config.seed, "synth/stock", index));
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::poisson_distribution<int> jumps(config.jump_intensity > 0.0 ? config.jump_intensity : 1.0);
  std::uniform_int_distribution<int> minute(1, kSessionMinutes);

  const double beta = config.attention_loading + config.loading_spread * (2.0 * u(rng) - 1.0);
  const double phi = config.persistence;
  const double sx2 = config.vol_of_vol * config.vol_of_vol / (1.0 - phi * phi);
  const double mu = std::log(config.mean_variance / kAnnualization) - 0.5 * (sx2 + beta * beta);
  const double on_ratio = config.overnight_share / (1.0 - config.overnight_share);

  double x = std::sqrt(sx2) * z(rng);
  double price = 50.0 * std::exp(0.5 * z(rng));
  const auto n = static_cast<std::size_t>(config.days);
  out.panel.days.reserve(n);
  out.integrated_variance.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) x = phi * x + config.vol_of_vol * z(rng);
    const double a_prev = t > 0 ? out.attention[t - 1] : 0.0;
    const double h = mu + x + beta * a_prev;
    const double v = std::exp(h);  // daily intraday variance of log returns
    out.integrated_variance.push_back(v * kAnnualization);

    if (t > 0) price *= std::exp(std::sqrt(on_ratio * v) * z(rng));
    Eigen::VectorXd r(kSessionMinutes);
    const double sd = std::sqrt(v / kSessionMinutes);
    for (int k = 0; k < kSessionMinutes; ++k) r(k) = sd * z(rng);
    const int nj = config.jump_intensity > 0.0 ? jumps(rng) : 0;
    for (int j = 0; j < nj; ++j) {
      const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
      r(minute(rng) - 1) += sign * config.jump_size * std::sqrt(v);
    }
    if (nj > 0) out.jump_days.push_back(calendar[t]);

    TradingDay day;
    day.date = calendar[t];
    day.prices.resize(kSessionMinutes + 1);
    day.prices(0) = price;
    for (int k = 0; k < kSessionMinutes; ++k) {
      price *= std::exp(r(k));
      day.prices(k + 1) = price;
    }
    out.panel.days.push_back(std::move(day));
  }
  return out;
}

std::vector<SviBatch> make_svi_batches(const std::vector<double>& truth, Date start, int length, int overlap) {
  if (length <= overlap || overlap < 1) throw std::invalid_argument("make_svi_batches: need length > overlap >= 1");
  const auto n = static_cast<int>(truth.size());
  std::vector<SviBatch> out;
  for (int s = 0, id = 1;; s += length - overlap, ++id) {
    const int e = std::min(n, s + length);
    SviBatch b;
    b.id = id;
    b.start = start + s;
    const double peak = *std::max_element(truth.begin() + s, truth.begin() + e);
    for (int i = s; i < e; ++i) b.values.push_back(peak > 0.0 ? std::round(100.0 * truth[static_cast<std::size_t>(i)] / peak) : 0.0);
    out.push_back(std::move(b));
    if (e == n) break;
  }
  return out;
}

namespace {

void write_svi(const std::filesystem::path& path, const std::vector<SviBatch>& batches) {
  auto out = csv::open_out(path);
  out << "batch_id,date,value\n";
  for (const auto& b : batches) {
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      out << b.id << ',' << (b.start + static_cast<int>(i)).to_string() << ',' << b.values[i] << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

FeatureDef feature(std::string name, FeatureGroup group, bool general, std::string source,
                   std::vector<std::string> files, std::string topic = {}, std::string measure = {}) {
  FeatureDef f;
  f.name = std::move(name);
  f.group = group;
  f.general = general;
  f.source = std::move(source);
  f.files = std::move(files);
  f.topic = std::move(topic);
  f.measure = std::move(measure);
  return f;
}

}  // namespace

void simulate_feature_files(const SynthConfig& config, const std::filesystem::path& dir) {
  config.validate();
  std::filesystem::create_directories(dir);
  const auto calendar = synth_calendar(config);
  const auto attention = latent_attention(config);
  std::mt19937_64 rng(task_seed(config.seed, "synth/features", 0));
  std::normal_distribution<double> z(0.0, 1.0);
  const Date first = calendar.front();
  const auto calendar_days = static_cast<std::size_t>(calendar.back() - first + 1);
  const auto n = calendar.size();

  // SVI: noisy calendar-day truths, delivered in normalized batches
  const std::vector<std::pair<std::string, std::string>> svi_files{
      {"svi_market_1.csv", "MKT"}, {"svi_market_2.csv", "MKT"}, {"svi_fomc.csv", "FOMC"},
      {"svi_nfp.csv", "NFP"},      {"svi_cpi.csv", "CPI"}};
  for (const auto& [file, _] : svi_files) {
    auto lat = ar1(rng, calendar_days, 0.9);
    std::vector<double> truth(calendar_days);
    for (std::size_t i = 0; i < calendar_days; ++i) {
      const bool weekend = (first + static_cast<int>(i)).is_weekend();
      truth[i] = 40.0 * std::exp(0.3 * lat[i]) * (weekend ? 0.6 : 1.0);
    }
    write_svi(dir / file, make_svi_batches(truth, first, config.svi_batch, config.svi_overlap));
  }

  {
    auto out = csv::open_out(dir / "pageviews.csv");
    out << "date,page,views\n";
    for (const char* page : {"Stock_market", "Dow_Jones_Industrial_Average"}) {
      const auto lat = ar1(rng, calendar_days, 0.8);
      for (std::size_t i = 0; i < calendar_days; ++i) {
        out << (first + static_cast<int>(i)).to_string() << ',' << page << ','
            << std::lround(5000.0 * std::exp(0.2 * lat[i])) << '\n';
      }
    }
    if (!out) throw DataError("failed writing pageviews.csv");
  }

  {
    // documents: counts and negative tone respond to the latent series for
    // FOMC and to independent noise for every other topic
    std::vector<std::string> topics{"stock-market"};
    topics.insert(topics.end(), macro_topics().begin(), macro_topics().end());
    std::vector<std::vector<double>> count_driver, tone_driver;
    for (const auto& t : topics) {
      count_driver.push_back(t == "FOMC" ? attention : ar1(rng, n, config.attention_persistence));
      tone_driver.push_back(t == "FOMC" ? attention : ar1(rng, n, config.attention_persistence));
    }
    auto out = csv::open_out(dir / "documents.csv");
    out << "date,topic,pos,neg\n";
    char buf[32];
    for (std::size_t d = 0; d < n; ++d) {
      const std::string date = calendar[d].to_string();
      for (std::size_t k = 0; k < topics.size(); ++k) {
        std::poisson_distribution<int> count(config.documents_per_day * std::exp(0.5 * count_driver[k][d] - 0.125));
        const int c = count(rng);
        for (int i = 0; i < c; ++i) {
          const double pos = logistic(-1.0 + 0.5 * z(rng));
          const double neg = logistic(-1.0 + 0.8 * tone_driver[k][d] + 0.5 * z(rng));
          std::snprintf(buf, sizeof buf, "%.4f,%.4f", pos, neg);
          out << date << ',' << topics[k] << ',' << buf << '\n';
        }
      }
    }
    if (!out) throw DataError("failed writing documents.csv");
  }

  {
    auto out = csv::open_out(dir / "schedule.csv");
    out << "datetime,variable,analyst_count\n";
    std::poisson_distribution<int> analysts(30);
    const int every = config.announcement_every;
    for (std::size_t v = 0; v < scheduled().size(); ++v) {
      const auto offset = static_cast<std::size_t>(v) * static_cast<std::size_t>(std::max(1, every / 3));
      for (std::size_t d = offset; d < n; d += static_cast<std::size_t>(every)) {
        out << calendar[d].to_string() << " 08:30," << scheduled()[v] << ',' << analysts(rng) << '\n';
      }
    }
    if (!out) throw DataError("failed writing schedule.csv");
  }

  FeatureManifest m;
  m.svi_overlap = config.svi_overlap;
  using G = FeatureGroup;
  m.features.push_back(feature("SVI_MKT", G::attention, true, "svi", {"svi_market_1.csv", "svi_market_2.csv"}));
  {
    auto pv = feature("PV_MKT", G::attention, true, "pageviews", {"pageviews.csv"});
    pv.pages = {"Stock_market", "Dow_Jones_Industrial_Average"};
    m.features.push_back(std::move(pv));
  }
  m.features.push_back(feature("T_MKT", G::attention, true, "documents", {"documents.csv"}, "stock-market", "count"));
  for (const auto& t : macro_topics()) {
    m.features.push_back(feature("T_" + t, G::attention, false, "documents", {"documents.csv"}, t, "count"));
  }
  for (const auto& t : scheduled()) {
    m.features.push_back(feature("SVI_" + t, G::attention, false, "svi", {"svi_" + lower(t) + ".csv"}));
  }
  for (const auto& t : scheduled()) {
    m.features.push_back(feature("AN_" + t, G::attention, false, "schedule", {"schedule.csv"}, t, "analysts"));
  }
  m.features.push_back(feature("POS_MKT", G::sentiment, true, "documents", {"documents.csv"}, "stock-market", "pos"));
  m.features.push_back(feature("NEG_MKT", G::sentiment, true, "documents", {"documents.csv"}, "stock-market", "neg"));
  for (const auto& t : macro_topics()) {
    m.features.push_back(feature("TWP_" + t, G::sentiment, false, "documents", {"documents.csv"}, t, "pos"));
    m.features.push_back(feature("TWN_" + t, G::sentiment, false, "documents", {"documents.csv"}, t, "neg"));
  }
  for (const auto& t : scheduled()) {
    m.features.push_back(feature("B_" + t, G::dummy, false, "schedule", {"schedule.csv"}, t, "dummy"));
  }
  write_manifest(dir / "manifest.json", m);

  static const char* const sectors[] = {"Communication Services", "Consumer Discretionary", "Consumer Staples",
                                        "Energy", "Financials", "Health Care", "Industrials",
                                        "Information Technology", "Materials", "Real Estate", "Utilities"};
  auto out = csv::open_out(dir / "sectors.csv");
  out << "symbol,sector\n";
  for (int i = 0; i < config.stocks; ++i) out << synth_symbol(i) << ',' << sectors[i % 11] << '\n';
  if (!out) throw DataError("failed writing sectors.csv");
}

void write_synthetic_market(const SynthConfig& config, const std::filesystem::path& dir, int jobs) {
  simulate_feature_files(config, dir);
  std::filesystem::create_directories(dir / "prices");
  parallel_for(static_cast<std::size_t>(config.stocks), jobs, [&](std::size_t i) {
    const auto s = simulate_stock(config, static_cast<int>(i));
    write_prices(dir / "prices" / (s.panel.symbol + ".csv"), s.panel);
  });
}

}  // namespace volcast
