#pragma once

#include <cstdio>
#include <string>

namespace cnir::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3 };

// Process-wide threshold; messages below it are dropped.
inline Level& threshold() {
  static Level level = Level::info;
  return level;
}

inline void write(Level level, const std::string& msg) {
  if (level < threshold()) return;
  static const char* names[] = {"DEBUG", "INFO", "WARN", "ERROR"};
  std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

inline void debug(const std::string& msg) { write(Level::debug, msg); }
inline void info(const std::string& msg) { write(Level::info, msg); }
inline void warn(const std::string& msg) { write(Level::warn, msg); }
inline void error(const std::string& msg) { write(Level::error, msg); }

}  // namespace cnir::log
