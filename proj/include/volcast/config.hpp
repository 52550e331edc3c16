#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "volcast/backtest.hpp"
#include "volcast/evaluation.hpp"
#include "volcast/log.hpp"
#include "volcast/market_data.hpp"
#include "volcast/realized.hpp"
#include "volcast/synth.hpp"

namespace volcast {

/// Flat key/value file in a small TOML subset: `[section]` headers,
/// `key = value` lines and `#` comments. Values are quoted strings, numbers,
/// true/false, or one-line arrays of those. Keys are stored as
/// `section.key`.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text, const std::string& origin = "config");
  static ConfigFile load(const std::filesystem::path& path);

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) > 0; }

  // Each getter leaves `out` untouched when the key is absent and throws
  // ConfigError naming the key when the value has the wrong type.
  void get(const std::string& key, std::string& out);
  void get(const std::string& key, int& out);
  void get(const std::string& key, double& out);
  void get(const std::string& key, bool& out);
  void get(const std::string& key, std::uint64_t& out);
  void get(const std::string& key, std::vector<int>& out);
  void get(const std::string& key, std::vector<std::string>& out);

  /// Keys of one `[prefix.name]` section family, e.g. the `name`s of model sections.
  [[nodiscard]] std::set<std::string> subsections(const std::string& prefix) const;

  /// Throws ConfigError listing every key no getter asked for.
  void check_all_used() const;

 private:
  struct Entry {
    std::string text;
    int line = 0;
  };
  const Entry* find(const std::string& key);
  [[noreturn]] void bad(const std::string& key, const Entry& e, const std::string& want) const;

  std::string origin_;
  std::map<std::string, Entry> values_;
  std::set<std::string> used_;
};

struct PathConfig {
  std::filesystem::path prices;    // price file or directory of price files
  std::filesystem::path manifest;  // feature manifest; its directory holds the raw feature files
  std::filesystem::path sectors;   // optional
  std::filesystem::path out = "volcast-out";
};

struct RunConfig {
  PathConfig paths;
  SessionConfig session;
  RealizedOptions realized;
  BacktestConfig backtest;
  EvaluationConfig evaluation;
  SynthConfig synth;
  bool synthesize = false;  // pipeline generates its own inputs first
  int jobs = 0;             // 0 = logical cores
  std::uint64_t seed = 0;
  LogLevel log_level = LogLevel::warning;

  /// Pushes seed and jobs into the stage configs.
  void propagate();
};

/// Reads a run configuration. Relative paths are resolved against the
/// config file's directory. Unknown keys and invalid values throw
/// ConfigError before any computation.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(ConfigFile& file, const std::filesystem::path& base_dir);

}  // namespace volcast
