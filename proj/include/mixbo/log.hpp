#pragma once

#include <functional>
#include <string_view>

namespace mixbo {

enum class LogLevel { Debug, Info, Warning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replace the process-wide sink (default: warnings to stderr). Returns the previous sink.
LogSink set_log_sink(LogSink sink);
void log(LogLevel level, std::string_view message);

inline void log_warning(std::string_view message) { log(LogLevel::Warning, message); }

}  // namespace mixbo
