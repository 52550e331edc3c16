#include "volcast/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"
#include "volcast/log.hpp"

namespace volcast {

namespace {

struct RawDay {
  std::vector<double> slots;  // NaN when missing
  int last_minute = -1;
};

}  // namespace

IntradayPanel load_prices(const std::filesystem::path& path, const std::string& symbol,
                          const SessionConfig& session) {
  if (session.close_minute <= session.open_minute) {
    throw std::invalid_argument("session close must follow open");
  }
  csv::Reader reader(path);
  const auto c_sym = reader.column("symbol");
  const auto c_date = reader.column("date");
  const auto c_time = reader.column("time");
  const auto c_price = reader.column("price");
  const auto width = std::max({c_sym, c_date, c_time, c_price}) + 1;
  const int n_slots = session.slots();

  std::map<Date, RawDay> raw;
  std::size_t outside = 0;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() < width) reader.fail("expected 4 fields, got " + std::to_string(f.size()));
    if (f[c_sym] != symbol) continue;
    Date date;
    int minute = 0;
    try {
      date = Date::parse(f[c_date]);
      minute = parse_clock(f[c_time]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    const double price = csv::to_double(reader, f[c_price]);
    if (!(price > 0.0) || !std::isfinite(price)) {
      throw DataError(reader.file() + ":" + std::to_string(reader.line()) +
                      ": nonpositive price " + f[c_price] + " for " + symbol);
    }
    const int slot = minute - session.open_minute;
    if (slot < 0 || slot >= n_slots) {
      ++outside;
      continue;
    }
    auto& day = raw[date];
    if (day.slots.empty()) day.slots.assign(static_cast<std::size_t>(n_slots), std::nan(""));
    if (!std::isnan(day.slots[static_cast<std::size_t>(slot)])) {
      reader.fail("duplicate timestamp " + f[c_date] + " " + f[c_time]);
    }
    day.slots[static_cast<std::size_t>(slot)] = price;
    day.last_minute = std::max(day.last_minute, minute);
  }
  if (outside > 0) {
    info(symbol + ": ignored " + std::to_string(outside) + " rows outside the session");
  }

  IntradayPanel panel;
  panel.symbol = symbol;
  panel.session_minutes = n_slots;
  for (auto& [date, day] : raw) {
    int usable = n_slots;
    const bool half_day = day.last_minute <= session.close_minute - session.half_day_gap_minutes;
    if (half_day) {
      if (!session.include_half_days) {
        info(symbol + " " + date.to_string() + ": half-day session excluded");
        continue;
      }
      usable = day.last_minute - session.open_minute + 1;
    }
    int missing = 0;
    for (int i = 0; i < usable; ++i) missing += std::isnan(day.slots[static_cast<std::size_t>(i)]);
    if (missing > session.max_missing_fraction * usable) {
      warn(symbol + " " + date.to_string() + ": " + std::to_string(missing) + " of " +
           std::to_string(usable) + " slots missing, day dropped");
      continue;
    }
    TradingDay td;
    td.date = date;
    td.prices.resize(n_slots);
    td.imputed_slots = missing + (n_slots - usable);
    double last = std::nan("");
    for (int i = 0; i < usable && std::isnan(last); ++i) last = day.slots[static_cast<std::size_t>(i)];
    for (int i = 0; i < n_slots; ++i) {
      const double v = i < usable ? day.slots[static_cast<std::size_t>(i)] : std::nan("");
      if (!std::isnan(v)) last = v;
      td.prices(i) = last;
    }
    panel.days.push_back(std::move(td));
  }
  return panel;
}

std::vector<std::string> list_symbols(const std::filesystem::path& path) {
  csv::Reader reader(path);
  const auto c_sym = reader.column("symbol");
  std::vector<std::string> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() <= c_sym) reader.fail("short row");
    if (out.empty() || out.back() != f[c_sym]) {
      if (std::find(out.begin(), out.end(), f[c_sym]) == out.end()) out.push_back(f[c_sym]);
    }
  }
  return out;
}

void write_prices(const std::filesystem::path& path, const IntradayPanel& panel,
                  const SessionConfig& session) {
  auto out = csv::open_out(path);
  out << "symbol,date,time,price\n";
  char clock[8];
  for (const auto& day : panel.days) {
    const std::string date = day.date.to_string();
    for (Eigen::Index i = 0; i < day.prices.size(); ++i) {
      const int minute = session.open_minute + static_cast<int>(i);
      std::snprintf(clock, sizeof clock, "%02d:%02d", minute / 60, minute % 60);
      out << panel.symbol << ',' << date << ',' << clock << ',' << csv::format(day.prices(i))
          << '\n';
    }
  }
}

Eigen::VectorXd intraday_returns(const TradingDay& day, int step, int offset) {
  if (step < 1) throw std::invalid_argument("step must be >= 1");
  if (offset < 0 || offset >= step) throw std::invalid_argument("offset must lie in [0, step)");
  const Eigen::Index m = day.prices.size() - 1;
  if (m < offset) return Eigen::VectorXd(0);
  const Eigen::Index n = (m - offset) / step;
  Eigen::VectorXd r(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    r(j) = std::log(day.prices(offset + (j + 1) * step)) - std::log(day.prices(offset + j * step));
  }
  return r;
}

double overnight_return(const TradingDay& prev, const TradingDay& cur) {
  if (!(prev.date < cur.date)) throw std::invalid_argument("overnight_return: prev must precede cur");
  return std::log(cur.open()) - std::log(prev.close());
}

}  // namespace volcast
