#include "volcast/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace volcast {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warning: return "warning";
    case LogLevel::error: return "error";
  }
  return "?";
}

LogSink& current_sink() {
  static LogSink sink = [](LogLevel level, const std::string& msg) {
    std::cerr << "volcast " << level_name(level) << ": " << msg << '\n';
  };
  return sink;
}

std::atomic<int> g_level{static_cast<int>(LogLevel::warning)};

}  // namespace

LogSink set_log_sink(LogSink sink) {
  std::lock_guard lock(sink_mutex());
  LogSink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }

void log(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) < g_level.load()) return;
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(level, message);
}

}  // namespace volcast
