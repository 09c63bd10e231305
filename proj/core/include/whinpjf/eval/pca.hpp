#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "whinpjf/autodiff/matrix.hpp"
#include "whinpjf/graph/entity.hpp"
#include "whinpjf/pretrain/rgcn.hpp"

namespace whinpjf::eval {

struct Projection {
  std::vector<std::uint32_t> ids;
  ad::Matrix<double> coords;          ///< n x 2
  std::vector<double> variances;      ///< covariance eigenvalues, descending
  std::array<std::vector<double>, 2> components;
};

/// Top-2 principal components of the centered rows, each signed so that its
/// largest-magnitude coordinate is positive. Throws DegenerateError for fewer
/// than 3 rows or rank-0 data.
Projection pca_2d(const ad::Matrix<double>& rows, std::vector<std::uint32_t> ids);

/// Projects the rows of `kind` selected by `ids` (all when empty) and writes
/// `id,x,y` to `csv`; `svg` adds a scatter colored by `labels` when given.
Projection pca_export(const pretrain::EmbeddingTable& table, graph::EntityKind kind,
                      std::span<const std::uint32_t> ids, const std::filesystem::path& csv,
                      const std::optional<std::filesystem::path>& svg = std::nullopt,
                      std::span<const std::uint32_t> labels = {});

void write_svg(const Projection& p, std::span<const std::uint32_t> labels, const std::filesystem::path& path);

/// Mean silhouette over Euclidean distances; points in singleton clusters
/// score 0. Needs at least two distinct labels.
double silhouette(const ad::Matrix<double>& points, std::span<const std::uint32_t> labels);

}  // namespace whinpjf::eval
