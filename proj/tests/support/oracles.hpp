#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "whinpjf/autodiff/matrix.hpp"
#include "whinpjf/graph/entity.hpp"
#include "whinpjf/sampling/sampler.hpp"

namespace whinpjf::testing {

using ad::Matrix;
using EdgeSet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

/// Unordered pairs {a, b} (a < b) of left entities that share at least one
/// right entity, by exhaustive pairwise intersection.
EdgeSet shared_neighbor_oracle(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                               std::uint32_t left_count);

/// One relational layer computed by looping over every (node, view,
/// neighbor) triple: out_i = act(z_i W0 + sum_v mean_{j in N_v(i)} z_j W_v).
Matrix<double> rgcn_layer_oracle(const sampling::SubgraphBatch& batch, const Matrix<double>& z,
                                 const Matrix<double>& self,
                                 const std::array<Matrix<double>, graph::kViewCount>& views,
                                 bool relu);

/// softmax(q K^T / sqrt(d_head)) V per head for a single query row.
/// q: 1 x d, keys/values: n x d; heads split the d columns evenly.
Matrix<double> attention_oracle(const Matrix<double>& q, const Matrix<double>& keys,
                                const Matrix<double>& values, std::size_t heads);

/// Exhaustive pairwise AUC: sum over (pos, neg) of [s+ > s-] + 0.5 [s+ == s-].
double pairwise_auc_oracle(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

/// Average precision from the explicit precision/recall curve.
double average_precision_oracle(const std::vector<double>& scores,
                                const std::vector<std::uint8_t>& labels);

/// Plain product with explicit loops.
Matrix<double> dense_matmul(const Matrix<double>& a, const Matrix<double>& b);

}  // namespace whinpjf::testing
