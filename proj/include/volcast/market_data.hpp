#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "volcast/date.hpp"

namespace volcast {

/// One session of 1-minute prices on a fixed calendar grid.
struct TradingDay {
  Date date;
  Eigen::VectorXd prices;  // prices(0) is the open, prices(last) the close
  int imputed_slots = 0;

  [[nodiscard]] double open() const { return prices(0); }
  [[nodiscard]] double close() const { return prices(prices.size() - 1); }
};

struct IntradayPanel {
  std::string symbol;
  std::vector<TradingDay> days;
  int session_minutes = 391;
};

/// Session grid and imputation policy.
struct SessionConfig {
  int open_minute = 9 * 60 + 30;  // 09:30
  int close_minute = 16 * 60;     // 16:00
  double max_missing_fraction = 0.20;
  bool include_half_days = false;
  /// A day whose last observation is at or before this many minutes before
  /// the close counts as a half-day session.
  int half_day_gap_minutes = 150;

  [[nodiscard]] int slots() const { return close_minute - open_minute + 1; }
};

/// Reads `symbol,date,time,price` rows for `symbol` and aligns them on the
/// session grid. Missing minutes are forward-filled (a leading gap is filled
/// backwards from the first observed price). Days missing more than
/// `max_missing_fraction` of slots are dropped with a warning. Rows outside
/// the session are ignored.
///
/// Throws ParseError (with line number) on malformed rows and DataError on a
/// nonpositive or non-finite price.
IntradayPanel load_prices(const std::filesystem::path& path, const std::string& symbol,
                          const SessionConfig& session = {});

/// Distinct symbols appearing in a price file, in order of first appearance.
std::vector<std::string> list_symbols(const std::filesystem::path& path);

/// Writes a panel in the input CSV layout.
void write_prices(const std::filesystem::path& path, const IntradayPanel& panel,
                  const SessionConfig& session = {});

/// Log returns on the subsampled grid offset, offset+step, ...; the grid
/// with offset k has floor((M - k) / step) returns for M = prices - 1.
Eigen::VectorXd intraday_returns(const TradingDay& day, int step, int offset);

/// ln(cur.open) - ln(prev.close).
double overnight_return(const TradingDay& prev, const TradingDay& cur);

}  // namespace volcast
