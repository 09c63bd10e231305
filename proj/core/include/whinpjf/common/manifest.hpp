#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace whinpjf {

/// Ordered `key=value` text record used for every on-disk manifest.
class Manifest {
 public:
  void set(std::string key, std::string value);
  void set(std::string key, std::uint64_t value) { set(std::move(key), std::to_string(value)); }
  void set(std::string key, double value);

  std::optional<std::string> find(std::string_view key) const;
  bool contains(std::string_view key) const { return find(key).has_value(); }
  /// Missing keys and unparsable values raise FormatError naming `source`.
  const std::string& get(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  double get_double(std::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
    return entries_;
  }

  std::string to_string() const;
  static Manifest parse(std::string_view text, std::string source);

  void save(const std::filesystem::path& path) const;
  static Manifest load(const std::filesystem::path& path);

  friend bool operator==(const Manifest& a, const Manifest& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string source_ = "manifest";
};

}  // namespace whinpjf
