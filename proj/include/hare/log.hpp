#pragma once

#include <cstdio>

namespace hare {

// Verbosity comes from the HARE_LOG environment variable:
// debug | info | warn (default) | error | off.
enum class LogLevel { Debug = 0, Info, Warn, Error, Off };

LogLevel log_level();

void log_line(LogLevel level, const char* fmt, ...) __attribute__((format(printf, 2, 3)));

#define HARE_DEBUG(...) ::hare::log_line(::hare::LogLevel::Debug, __VA_ARGS__)
#define HARE_INFO(...) ::hare::log_line(::hare::LogLevel::Info, __VA_ARGS__)
#define HARE_WARN(...) ::hare::log_line(::hare::LogLevel::Warn, __VA_ARGS__)
#define HARE_ERROR(...) ::hare::log_line(::hare::LogLevel::Error, __VA_ARGS__)

}  // namespace hare
