#include "dehum/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace dehum {

namespace {

LogLevel parse_env_level() {
    const char* env = std::getenv("DEHUM_LOG");
    if (env == nullptr) return LogLevel::warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::error;
    if (std::strcmp(env, "warn") == 0) return LogLevel::warn;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    return LogLevel::warn;
}

LogLevel& current_level() {
    static LogLevel level = parse_env_level();
    return level;
}

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::error: return "error";
        case LogLevel::warn: return "warn";
        case LogLevel::info: return "info";
        case LogLevel::debug: return "debug";
    }
    return "?";
}

} // namespace

LogLevel log_level() { return current_level(); }

void set_log_level(LogLevel level) { current_level() = level; }

void log_message(LogLevel level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(current_level())) return;
    std::fprintf(stderr, "[%s] %s\n", level_name(level), message.c_str());
}

} // namespace dehum
