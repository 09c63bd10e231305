#pragma once

#include <filesystem>
#include <string>

#include "whinpjf/autodiff/matrix.hpp"
#include "whinpjf/autodiff/parameters.hpp"

namespace whinpjf::model {

/// Binary matrix container: "WHINMAT1", u32 rows, u32 cols, then row-major
/// little-endian float32 values.
void save_matrix(const std::filesystem::path& path, const ad::Matrix<float>& m);
/// Throws FormatError on bad magic, truncation or trailing bytes.
ad::Matrix<float> load_matrix(const std::filesystem::path& path);

/// One `<prefix><name>.bin` file per parameter.
void save_parameters(const std::filesystem::path& dir, const std::string& prefix,
                     const ad::ParameterStore<float>& params);
/// Fills every parameter of `params` (names and shapes must match).
void load_parameters(const std::filesystem::path& dir, const std::string& prefix,
                     ad::ParameterStore<float>& params);

}  // namespace whinpjf::model
