#include "whinpjf/model/checkpoint.hpp"

#include "whinpjf/common/binary.hpp"
#include "whinpjf/common/error.hpp"

namespace whinpjf::model {

namespace {
constexpr std::string_view kMatrixMagic = "WHINMAT1";
}

void save_matrix(const std::filesystem::path& path, const ad::Matrix<float>& m) {
  if (!m.all_finite()) throw NumericError("refusing to save non-finite matrix " + path.string());
  binary::Writer w;
  w.magic(kMatrixMagic);
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (float v : m.values()) w.f32(v);
  binary::write_file(path, w.bytes());
}

ad::Matrix<float> load_matrix(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DependencyError("missing checkpoint file " + path.string());
  binary::Reader in(binary::read_file(path), path.string());
  in.expect_magic(kMatrixMagic);
  const std::uint32_t rows = in.u32();
  const std::uint32_t cols = in.u32();
  if (in.remaining() != static_cast<std::size_t>(rows) * cols * 4) {
    throw FormatError(path.string() + ": payload size does not match " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
  ad::Matrix<float> m(rows, cols);
  for (float& v : m.values()) v = in.f32();
  in.expect_end();
  return m;
}

void save_parameters(const std::filesystem::path& dir, const std::string& prefix,
                     const ad::ParameterStore<float>& params) {
  std::filesystem::create_directories(dir);
  for (ad::ParamHandle h = 0; h < params.size(); ++h) {
    save_matrix(dir / (prefix + params.name(h) + ".bin"), params.value(h));
  }
}

void load_parameters(const std::filesystem::path& dir, const std::string& prefix,
                     ad::ParameterStore<float>& params) {
  for (ad::ParamHandle h = 0; h < params.size(); ++h) {
    ad::Matrix<float> m = load_matrix(dir / (prefix + params.name(h) + ".bin"));
    const auto& expected = params.value(h);
    if (m.rows() != expected.rows() || m.cols() != expected.cols()) {
      throw FormatError("parameter " + params.name(h) + " has shape " + ad::shape_string(m) +
                        ", expected " + ad::shape_string(expected));
    }
    params.value(h) = std::move(m);
  }
}

}  // namespace whinpjf::model
