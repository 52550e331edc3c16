#include <cmath>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"
#include "volcast/errors.hpp"
#include "volcast/market_data.hpp"

using namespace volcast;

namespace {

std::string full_day_csv(const std::string& symbol, const std::string& date, double price,
                         int skip_minute = -1) {
  std::ostringstream os;
  for (int m = 9 * 60 + 30; m <= 16 * 60; ++m) {
    if (m == skip_minute) continue;
    char clock[8];
    std::snprintf(clock, sizeof clock, "%02d:%02d", m / 60, m % 60);
    os << symbol << ',' << date << ',' << clock << ',' << price + 0.01 * (m - 570) << '\n';
  }
  return os.str();
}

}  // namespace

TEST_CASE("date parsing and formatting") {
  const Date d = Date::parse("2016-02-24");
  CHECK(d.to_string() == "2016-02-24");
  CHECK(d.weekday() == 3);  // Wednesday
  CHECK((d + 3).is_weekend());
  CHECK(Date::parse("1970-01-01").days() == 0);
  CHECK_THROWS_AS(Date::parse("2016-2-24"), std::invalid_argument);
  CHECK(DateTime::parse("2016-02-24 08:30").minute == 510);
}

TEST_CASE("load_prices aligns a complete day on the 391-slot grid") {
  testutil::TempDir dir("md");
  testutil::write_file(dir / "p.csv", "symbol,date,time,price\n" + full_day_csv("AAA", "2020-01-02", 100.0) +
                                          full_day_csv("BBB", "2020-01-02", 50.0));
  const auto panel = load_prices(dir / "p.csv", "AAA");
  REQUIRE(panel.days.size() == 1);
  CHECK(panel.days[0].prices.size() == 391);
  CHECK(panel.days[0].open() == doctest::Approx(100.0));
  CHECK(panel.days[0].close() == doctest::Approx(103.9));
  CHECK(panel.days[0].imputed_slots == 0);
}

TEST_CASE("missing minute is forward filled") {
  testutil::TempDir dir("md");
  const int missing = 10 * 60 + 31;
  testutil::write_file(dir / "p.csv",
                       "symbol,date,time,price\n" + full_day_csv("AAA", "2020-01-02", 100.0, missing));
  const auto panel = load_prices(dir / "p.csv", "AAA");
  REQUIRE(panel.days.size() == 1);
  const auto& p = panel.days[0].prices;
  const int slot = missing - 570;
  CHECK(p(slot) == p(slot - 1));
  CHECK(panel.days[0].imputed_slots == 1);
}

TEST_CASE("nonpositive price is a hard error") {
  testutil::TempDir dir("md");
  testutil::write_file(dir / "p.csv", "symbol,date,time,price\nAAA,2020-01-02,09:30,0.0\n");
  CHECK_THROWS_AS(load_prices(dir / "p.csv", "AAA"), DataError);
}

TEST_CASE("malformed row reports its line number") {
  testutil::TempDir dir("md");
  testutil::write_file(dir / "p.csv",
                       "symbol,date,time,price\nAAA,2020-01-02,09:30,100\nAAA,2020-01-02,09:31,abc\n");
  try {
    load_prices(dir / "p.csv", "AAA");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("day with more than 20% missing slots is dropped with a warning") {
  testutil::TempDir dir("md");
  std::ostringstream os;
  os << "symbol,date,time,price\n" << full_day_csv("AAA", "2020-01-02", 100.0);
  // second day: only first 300 minutes observed plus the close
  for (int m = 570; m < 570 + 300; m += 2) {
    char clock[8];
    std::snprintf(clock, sizeof clock, "%02d:%02d", m / 60, m % 60);
    os << "AAA,2020-01-03," << clock << ",100\n";
  }
  os << "AAA,2020-01-03,16:00,100\n";
  testutil::write_file(dir / "p.csv", os.str());
  testutil::CaptureWarnings warnings;
  const auto panel = load_prices(dir / "p.csv", "AAA");
  CHECK(panel.days.size() == 1);
  CHECK(warnings.messages.size() == 1);
}

TEST_CASE("half-day sessions are excluded unless requested") {
  testutil::TempDir dir("md");
  std::ostringstream os;
  os << "symbol,date,time,price\n";
  for (int m = 570; m <= 13 * 60; ++m) {
    char clock[8];
    std::snprintf(clock, sizeof clock, "%02d:%02d", m / 60, m % 60);
    os << "AAA,2020-11-27," << clock << ',' << 100 + 0.01 * (m - 570) << '\n';
  }
  testutil::write_file(dir / "p.csv", os.str());
  CHECK(load_prices(dir / "p.csv", "AAA").days.empty());
  SessionConfig cfg;
  cfg.include_half_days = true;
  const auto panel = load_prices(dir / "p.csv", "AAA", cfg);
  REQUIRE(panel.days.size() == 1);
  CHECK(panel.days[0].prices.size() == 391);
  CHECK(panel.days[0].close() == doctest::Approx(102.1));
}

TEST_CASE("write_prices round-trips through load_prices") {
  testutil::TempDir dir("md");
  std::mt19937_64 rng(3);
  IntradayPanel panel;
  panel.symbol = "XYZ";
  panel.days.push_back(testutil::random_day(rng, Date::parse("2021-03-01")));
  panel.days.push_back(testutil::random_day(rng, Date::parse("2021-03-02")));
  write_prices(dir / "x.csv", panel);
  const auto back = load_prices(dir / "x.csv", "XYZ");
  REQUIRE(back.days.size() == 2);
  CHECK(back.days[1].prices.isApprox(panel.days[1].prices, 0.0));
  CHECK(list_symbols(dir / "x.csv") == std::vector<std::string>{"XYZ"});
}

TEST_CASE("intraday_returns") {
  const Date d = Date::parse("2020-01-02");
  SUBCASE("constant price gives zero returns") {
    const auto r = intraday_returns(testutil::make_day(d, Eigen::VectorXd::Constant(391, 50.0)), 5, 2);
    CHECK(r.size() == 77);
    CHECK(r.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("log identity") {
    Eigen::VectorXd p(3);
    p << 100.0, 100.0 * std::exp(0.01), 100.0 * std::exp(0.03);
    const auto r = intraday_returns(testutil::make_day(d, p), 1, 0);
    REQUIRE(r.size() == 2);
    CHECK(r(0) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(r(1) == doctest::Approx(0.02).epsilon(1e-12));
  }
  SUBCASE("five-minute grid has 78 returns") {
    const auto r = intraday_returns(testutil::make_day(d, Eigen::VectorXd::Constant(391, 1.0)), 5, 0);
    CHECK(r.size() == 78);
  }
  SUBCASE("offset must be below step") {
    const auto day = testutil::make_day(d, Eigen::VectorXd::Constant(391, 1.0));
    CHECK_THROWS_AS(intraday_returns(day, 5, 5), std::invalid_argument);
    CHECK_THROWS_AS(intraday_returns(day, 0, 0), std::invalid_argument);
  }
}

TEST_CASE("property: every offset grid telescopes to its endpoint log ratio") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto day = testutil::random_day(rng, Date::parse("2020-01-02"));
    CHECK(intraday_returns(day, 1, 0).size() == 390);
    for (int step : {1, 5, 7}) {
      for (int k = 0; k < step; ++k) {
        const auto r = intraday_returns(day, step, k);
        const auto last = k + r.size() * step;
        CHECK(std::abs(r.sum() - (std::log(day.prices(last)) - std::log(day.prices(k)))) < 1e-12);
      }
    }
    // the offset-0 five-minute grid covers the whole session
    CHECK(std::abs(intraday_returns(day, 5, 0).sum() - std::log(day.close() / day.open())) < 1e-12);
  }
}

TEST_CASE("overnight_return") {
  Eigen::VectorXd a(2), b(2);
  a << 99.0, 100.0;
  b << 100.0, 101.0;
  const auto prev = testutil::make_day(Date::parse("2020-01-02"), a);
  CHECK(overnight_return(prev, testutil::make_day(Date::parse("2020-01-03"), b)) == 0.0);
  b(0) = 100.0 * std::exp(0.02);
  CHECK(overnight_return(prev, testutil::make_day(Date::parse("2020-01-03"), b)) ==
        doctest::Approx(0.02).epsilon(1e-12));
  b(0) = 95.0;
  CHECK(overnight_return(prev, testutil::make_day(Date::parse("2020-01-03"), b)) ==
        doctest::Approx(std::log(0.95)).epsilon(1e-12));
  CHECK_THROWS(overnight_return(testutil::make_day(Date::parse("2020-01-03"), b), prev));
}
