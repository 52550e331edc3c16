#include <cstdlib>
#include <sys/wait.h>

#include "doctest.h"
#include "test_util.hpp"

namespace {

// Exit status of the CLI with `args`; stderr goes to `err` when given.
int run(const std::string& args, const std::filesystem::path& err = {}) {
  std::string cmd = std::string("\"") + VOLCAST_BIN + "\" " + args + " >/dev/null";
  cmd += err.empty() ? " 2>/dev/null" : " 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("exit codes") {
  testutil::TempDir dir("cli");
  CHECK(run("--help") == 0);
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("--config /nonexistent.toml pipeline") == 1);

  testutil::write_file(dir / "bad.toml", "[run]\nseeds = 3\n");
  CHECK(run("--config " + (dir / "bad.toml").string() + " pipeline") == 1);

  // unreadable inputs are data errors
  CHECK(run("ingest --prices " + (dir / "missing").string() + " --out " + (dir / "r").string()) == 2);
  testutil::write_file(dir / "px.csv", "symbol,date,time,price\nAAA,2020-01-02,09:30,-1\n");
  CHECK(run("ingest --prices " + (dir / "px.csv").string() + " --out " + (dir / "r").string()) == 2);
}

TEST_CASE("stage commands chain and evaluate warns without sectors") {
  testutil::TempDir dir("cli_chain");
  const auto d = dir.path();
  testutil::write_file(d / "run.toml",
                       "[backtest]\nestimation_window = 120\ncalibration_window = 60\n"
                       "models = [\"HAR\", \"HAR-A\", \"CSR-S\"]\n"
                       "[evaluation]\nmcs_bootstrap = 50\n"
                       "[synth]\nstocks = 2\ndays = 330\n");
  const std::string cfg = "--config " + (d / "run.toml").string() + " --seed 3 ";
  REQUIRE(run(cfg + "synth --out " + (d / "data").string()) == 0);
  REQUIRE(run(cfg + "ingest --prices " + (d / "data" / "prices").string() + " --out " + (d / "realized").string()) == 0);
  const std::string manifest = " --manifest " + (d / "data" / "manifest.json").string();
  REQUIRE(run(cfg + "features --realized " + (d / "realized").string() + manifest + " --out " + (d / "features").string()) == 0);
  CHECK(std::filesystem::exists(d / "features" / "frames" / "STK001.columns.json"));
  REQUIRE(run(cfg + "backtest --realized " + (d / "realized").string() + " --features " +
              (d / "features" / "features.csv").string() + manifest + " --out " + (d / "fc" / "forecasts.csv").string()) == 0);
  CHECK(std::filesystem::exists(d / "fc" / "audit.jsonl"));
  const auto text = testutil::read_file(d / "fc" / "forecasts.csv");
  CHECK(text.rfind("symbol,model,date,horizon,forecast_var,forecast_log,filtered,realized\n", 0) == 0);

  REQUIRE(run(cfg + "evaluate --forecasts " + (d / "fc" / "forecasts.csv").string() + " --out " + (d / "report").string(),
              d / "err.txt") == 0);
  CHECK(testutil::read_file(d / "err.txt").find("no sector panel") != std::string::npos);
  for (const char* f : {"losses.csv", "ranks.csv", "mcs.csv", "wilcoxon.csv", "importance.csv", "report.txt"})
    CHECK(std::filesystem::exists(d / "report" / f));

  // the backtest refuses a feature table whose columns are not in the manifest
  testutil::write_file(d / "other.json", R"({"features": []})");
  CHECK(run(cfg + "backtest --realized " + (d / "realized").string() + " --features " +
            (d / "features" / "features.csv").string() + " --manifest " + (d / "other.json").string() + " --out " +
            (d / "x.csv").string()) == 2);
}
