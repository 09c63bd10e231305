#include "whinpjf/common/manifest.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>

#include "whinpjf/common/binary.hpp"
#include "whinpjf/common/error.hpp"

namespace whinpjf {

void Manifest::set(std::string key, std::string value) {
  if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
    throw ContractError("manifest entries may not contain '=' in keys or newlines: " + key);
  }
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

void Manifest::set(std::string key, double value) {
  // Shortest representation that round-trips exactly.
  set(std::move(key), fmt::format("{}", value));
}

std::optional<std::string> Manifest::find(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& Manifest::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw FormatError(source_ + ": missing key '" + std::string(key) + "'");
}

std::uint64_t Manifest::get_u64(std::string_view key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw FormatError(source_ + ": key '" + std::string(key) + "' is not an unsigned integer: " + v);
  }
  return out;
}

double Manifest::get_double(std::string_view key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw FormatError(source_ + ": key '" + std::string(key) + "' is not a number: " + v);
  }
  return out;
}

std::string Manifest::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

Manifest Manifest::parse(std::string_view text, std::string source) {
  Manifest m;
  m.source_ = source;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw ParseError(source, line_no, "expected key=value");
    }
    m.entries_.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  return m;
}

void Manifest::save(const std::filesystem::path& path) const {
  binary::write_text(path, to_string());
}

Manifest Manifest::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DependencyError("missing manifest " + path.string());
  return parse(binary::read_text(path), path.string());
}

}  // namespace whinpjf
