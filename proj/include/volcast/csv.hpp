#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace volcast::csv {

/// Line-oriented reader for the comma-separated inputs. Fields are not
/// quoted; surrounding whitespace and a trailing '\r' are stripped. Blank
/// lines are skipped.
class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);

  /// Header fields, read on construction. Throws ParseError when absent.
  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
  /// Column index of `name`; throws ParseError naming the file if missing.
  [[nodiscard]] std::size_t column(std::string_view name) const;

  /// Reads the next data row; returns false at end of file.
  bool next(std::vector<std::string>& fields);
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] const std::string& file() const { return file_; }

  /// Throws ParseError for the current line.
  [[noreturn]] void fail(const std::string& what) const;

 private:
  std::ifstream in_;
  std::string file_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
};

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

double to_double(const Reader& reader, std::string_view field);
long to_long(const Reader& reader, std::string_view field);

/// Shortest decimal text that round-trips to the same double.
std::string format(double value);

/// Opens `path` for writing, creating parent directories.
std::ofstream open_out(const std::filesystem::path& path);

}  // namespace volcast::csv
