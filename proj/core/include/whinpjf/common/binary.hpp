#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace whinpjf::binary {

/// Appends little-endian encodings to a byte buffer.
class Writer {
 public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u32(bits);
  }

  const std::vector<char>& bytes() const noexcept { return bytes_; }

 private:
  std::vector<char> bytes_;
};

/// Bounds-checked little-endian reader; any overrun throws FormatError.
class Reader {
 public:
  Reader(std::vector<char> bytes, std::string source)
      : bytes_(std::move(bytes)), source_(std::move(source)) {}

  void expect_magic(std::string_view m);
  std::uint32_t u32();
  float f32();
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  /// Throws FormatError unless every byte was consumed.
  void expect_end() const;

 private:
  void need(std::size_t n) const;

  std::vector<char> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

/// Whole-file helpers; failures raise IoError.
std::vector<char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const char> bytes);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace whinpjf::binary
