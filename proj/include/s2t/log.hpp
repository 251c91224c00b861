// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

// Minimal leveled logging to stderr. The level comes from S2T_LOG_LEVEL
// (error, warn, info, debug); default warn.
namespace s2t::logging {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline Level threshold() {
  const char* env = std::getenv("S2T_LOG_LEVEL");
  if (!env) return Level::Warn;
  if (!std::strcmp(env, "error")) return Level::Error;
  if (!std::strcmp(env, "info")) return Level::Info;
  if (!std::strcmp(env, "debug")) return Level::Debug;
  return Level::Warn;
}

inline void write(Level level, const char* tag, const std::string& msg) {
  if (level <= threshold()) std::cerr << "[" << tag << "] " << msg << '\n';
}

inline void error(const std::string& msg) { write(Level::Error, "error", msg); }
inline void warn(const std::string& msg) { write(Level::Warn, "warn", msg); }
inline void info(const std::string& msg) { write(Level::Info, "info", msg); }
inline void debug(const std::string& msg) { write(Level::Debug, "debug", msg); }

}  // namespace s2t::logging
