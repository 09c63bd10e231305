#include "whinpjf/common/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace whinpjf::log {
namespace {

std::atomic<Level> g_level{Level::info};
std::mutex g_mutex;

constexpr std::string_view level_name(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    case Level::off: return "off";
  }
  return "info";
}

bool needs_quotes(std::string_view v) {
  if (v.empty()) return true;
  for (char c : v) {
    if (c == ' ' || c == '=' || c == '"' || c == '\t' || c == '\n') return true;
  }
  return false;
}

}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void record(Level lvl, std::string_view event, std::initializer_list<Field> fields) {
  if (lvl < g_level.load()) return;
  std::string line = fmt::format("level={} event={}", level_name(lvl), event);
  for (const auto& f : fields) {
    if (needs_quotes(f.value)) {
      std::string escaped;
      for (char c : f.value) {
        if (c == '"' || c == '\\') escaped.push_back('\\');
        escaped.push_back(c == '\n' ? ' ' : c);
      }
      line += fmt::format(" {}=\"{}\"", f.key, escaped);
    } else {
      line += fmt::format(" {}={}", f.key, f.value);
    }
  }
  line.push_back('\n');
  std::lock_guard lock(g_mutex);
  std::fputs(line.c_str(), stderr);
}

}  // namespace whinpjf::log
