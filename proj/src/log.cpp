#include "hare/log.hpp"

#include <cstdarg>
#include <cstdlib>
#include <cstring>

namespace hare {

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("HARE_LOG");
        if (!env) return LogLevel::Warn;
        if (!strcmp(env, "debug")) return LogLevel::Debug;
        if (!strcmp(env, "info")) return LogLevel::Info;
        if (!strcmp(env, "warn")) return LogLevel::Warn;
        if (!strcmp(env, "error")) return LogLevel::Error;
        if (!strcmp(env, "off") || !strcmp(env, "silent")) return LogLevel::Off;
        return LogLevel::Warn;
    }();
    return level;
}

void log_line(LogLevel level, const char* fmt, ...) {
    if (static_cast<int>(level) < static_cast<int>(log_level())) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::fprintf(stderr, "[hare:%s] ", names[static_cast<int>(level)]);
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

}  // namespace hare
