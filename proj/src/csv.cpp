#include "volcast/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "volcast/errors.hpp"

namespace volcast::csv {

Reader::Reader(const std::filesystem::path& path) : in_(path), file_(path.string()) {
  if (!in_) {
    throw DataError("cannot open " + file_);
  }
  std::vector<std::string> fields;
  if (!next(fields)) {
    throw ParseError(file_, 1, "missing header");
  }
  header_ = std::move(fields);
}

std::size_t Reader::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw ParseError(file_, 1, "header lacks column '" + std::string(name) + "'");
}

bool Reader::next(std::vector<std::string>& fields) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (trim(line).empty()) continue;
    fields = split(line);
    return true;
  }
  return false;
}

void Reader::fail(const std::string& what) const { throw ParseError(file_, line_, what); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const Reader& reader, std::string_view field) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    reader.fail("not a number: '" + std::string(field) + "'");
  }
  return value;
}

long to_long(const Reader& reader, std::string_view field) {
  long value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    reader.fail("not an integer: '" + std::string(field) + "'");
  }
  return value;
}

std::string format(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace volcast::csv
