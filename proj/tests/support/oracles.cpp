#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace whinpjf::testing {

EdgeSet shared_neighbor_oracle(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                               std::uint32_t left_count) {
  std::vector<std::set<std::uint32_t>> right(left_count);
  for (const auto& [l, r] : edges) right[l].insert(r);
  EdgeSet out;
  for (std::uint32_t a = 0; a < left_count; ++a) {
    for (std::uint32_t b = a + 1; b < left_count; ++b) {
      for (std::uint32_t x : right[a]) {
        if (right[b].count(x)) {
          out.emplace(a, b);
          break;
        }
      }
    }
  }
  return out;
}

Matrix<double> dense_matmul(const Matrix<double>& a, const Matrix<double>& b) {
  Matrix<double> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

Matrix<double> rgcn_layer_oracle(const sampling::SubgraphBatch& batch, const Matrix<double>& z,
                                 const Matrix<double>& self,
                                 const std::array<Matrix<double>, graph::kViewCount>& views,
                                 bool relu) {
  const std::size_t n = batch.nodes.size();
  const std::size_t d = z.cols();
  Matrix<double> out(n, self.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < self.cols(); ++c) {
      double acc = 0;
      for (std::size_t k = 0; k < d; ++k) acc += z(i, k) * self(k, c);
      for (std::size_t v = 0; v < graph::kViewCount; ++v) {
        double sum = 0;
        std::size_t degree = 0;
        for (const auto& [src, dst] : batch.edges[v]) {
          if (src != i) continue;
          ++degree;
          for (std::size_t k = 0; k < d; ++k) sum += z(dst, k) * views[v](k, c);
        }
        if (degree > 0) acc += sum / static_cast<double>(degree);
      }
      out(i, c) = relu ? std::max(acc, 0.0) : acc;
    }
  }
  return out;
}

Matrix<double> attention_oracle(const Matrix<double>& q, const Matrix<double>& keys,
                                const Matrix<double>& values, std::size_t heads) {
  const std::size_t d = q.cols();
  const std::size_t hd = d / heads;
  Matrix<double> out(1, d);
  for (std::size_t h = 0; h < heads; ++h) {
    std::vector<double> logits(keys.rows());
    for (std::size_t j = 0; j < keys.rows(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < hd; ++k) s += q(0, h * hd + k) * keys(j, h * hd + k);
      logits[j] = s / std::sqrt(static_cast<double>(hd));
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0;
    for (double& l : logits) z += (l = std::exp(l - mx));
    for (std::size_t j = 0; j < keys.rows(); ++j) {
      for (std::size_t k = 0; k < hd; ++k) out(0, h * hd + k) += logits[j] / z * values(j, h * hd + k);
    }
  }
  return out;
}

double pairwise_auc_oracle(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

double average_precision_oracle(const std::vector<double>& scores,
                                const std::vector<std::uint8_t>& labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  // Precision and recall after each cut k; AP = sum (R_k - R_{k-1}) P_k.
  double ap = 0, prev_recall = 0;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    double tp = 0;
    for (std::size_t i = 0; i < k; ++i) tp += labels[order[i]];
    const double precision = tp / static_cast<double>(k);
    const double recall = tp / positives;
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

}  // namespace whinpjf::testing
