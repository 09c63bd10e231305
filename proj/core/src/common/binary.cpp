#include "whinpjf/common/binary.hpp"

#include <fstream>
#include <iterator>

#include "whinpjf/common/error.hpp"

namespace whinpjf::binary {

void Reader::need(std::size_t n) const {
  if (bytes_.size() - pos_ < n) {
    throw FormatError(source_ + ": truncated (need " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_) + ", file has " + std::to_string(bytes_.size()) + ")");
  }
}

void Reader::expect_magic(std::string_view m) {
  need(m.size());
  if (std::string_view(bytes_.data() + pos_, m.size()) != m) {
    throw FormatError(source_ + ": bad magic, expected '" + std::string(m) + "'");
  }
  pos_ += m.size();
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
  }
  pos_ += 4;
  return v;
}

float Reader::f32() {
  const std::uint32_t bits = u32();
  float v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void Reader::expect_end() const {
  if (pos_ != bytes_.size()) {
    throw FormatError(source_ + ": " + std::to_string(bytes_.size() - pos_) + " trailing bytes");
  }
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span<const char>(text.data(), text.size()));
}

}  // namespace whinpjf::binary
