#pragma once

#include <functional>
#include <string>

namespace volcast {

enum class LogLevel { debug = 0, info = 1, warning = 2, error = 3 };

using LogSink = std::function<void(LogLevel, const std::string&)>;

/// Replaces the process-wide sink and returns the previous one. The default
/// sink writes warnings and errors to stderr.
LogSink set_log_sink(LogSink sink);
void set_log_level(LogLevel level);

void log(LogLevel level, const std::string& message);
inline void warn(const std::string& message) { log(LogLevel::warning, message); }
inline void info(const std::string& message) { log(LogLevel::info, message); }

}  // namespace volcast
