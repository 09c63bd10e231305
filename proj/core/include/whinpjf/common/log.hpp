#pragma once

#include <fmt/format.h>

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

namespace whinpjf::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

/// Process-wide threshold; records below it are dropped.
void set_level(Level level);
Level level();

/// One structured field of a log record.
struct Field {
  std::string_view key;
  std::string value;

  template <typename T>
  Field(std::string_view k, const T& v) : key(k), value(fmt::format("{}", v)) {}
  Field(std::string_view k, double v) : key(k), value(fmt::format("{:.6f}", v)) {}
  Field(std::string_view k, float v) : key(k), value(fmt::format("{:.6f}", v)) {}
};

/// Emit a single `event=<name> k1=v1 k2=v2 ...` line to stderr.
void record(Level level, std::string_view event, std::initializer_list<Field> fields);

inline void info(std::string_view event, std::initializer_list<Field> fields = {}) {
  record(Level::info, event, fields);
}
inline void warn(std::string_view event, std::initializer_list<Field> fields = {}) {
  record(Level::warn, event, fields);
}
inline void debug(std::string_view event, std::initializer_list<Field> fields = {}) {
  record(Level::debug, event, fields);
}

}  // namespace whinpjf::log
