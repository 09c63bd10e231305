#include "support/csagnn_oracles.hpp"

#include <algorithm>
#include <cmath>

#include "support/oracles.hpp"

namespace whinpjf::testing {

using graph::EntityKind;
using graph::Relation;

namespace {

Matrix<double> matmul(const Matrix<double>& a, const Matrix<double>& b) { return dense_matmul(a, b); }

}  // namespace

Matrix<double> rows_of(const Matrix<float>& table, std::span<const std::uint32_t> ids) {
  Matrix<double> out(ids.size(), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t c = 0; c < table.cols(); ++c) out(i, c) = table(ids[i], c);
  }
  return out;
}

Matrix<double> contextual_oracle(const Matrix<double>& tokens, const Matrix<double>& queries,
                                 const ad::ParameterStore<double>& p, const csagnn::CsagnnLayout& l) {
  Matrix<double> acc(1, l.dim);
  if (tokens.rows() == 0) return acc;
  const auto keys = matmul(tokens, p.value(l.wk));
  const auto values = matmul(tokens, p.value(l.wv));
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    Matrix<double> row(1, l.dim);
    for (std::size_t c = 0; c < l.dim; ++c) row(0, c) = queries(q, c);
    const auto out = testing::attention_oracle(matmul(row, p.value(l.wq)), keys, values, l.heads);
    for (std::size_t c = 0; c < l.dim; ++c) acc(0, c) += out(0, c) / static_cast<double>(queries.rows());
  }
  return matmul(acc, p.value(l.wo));
}

double cosine_clamped(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return std::max(0.0, dot / std::sqrt(na * nb));
}

std::vector<double> mean_rows(const Matrix<float>& table, std::span<const std::uint32_t> ids) {
  std::vector<double> out(table.cols(), 0.0);
  for (auto id : ids) {
    for (std::size_t c = 0; c < table.cols(); ++c) out[c] += table(id, c);
  }
  for (double& v : out) v /= std::max<std::size_t>(ids.size(), 1);
  return out;
}

std::vector<double> social_oracle(const csagnn::PairContext& pair, const csagnn::Features& f,
                                  const csagnn::SkillContext& skills, const ad::ParameterStore<double>& p,
                                  const csagnn::CsagnnLayout& l) {
  const auto& store = *f.store;
  const auto& structure = *f.structure;
  const auto& text = *f.text;
  const auto& skill_table = structure.kind(EntityKind::skill);
  const auto job_mean = mean_rows(skill_table, skills.job_skills[pair.job]);
  const auto queries = rows_of(skill_table, skills.job_skills[pair.job]);
  const std::size_t n = pair.nodes.size();
  const std::size_t width = 2 * l.dim;
  std::vector<Matrix<double>> h(n, Matrix<double>(1, width));
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = pair.nodes[i];
    const auto fc = contextual_oracle(text.tokens_of(graph::member(m)).cast<double>(), queries, p, l);
    for (std::size_t c = 0; c < l.dim; ++c) {
      h[i](0, c) = fc(0, c);
      h[i](0, l.dim + c) = structure.kind(EntityKind::member)(m, c);
    }
  }
  std::vector<double> total(width);
  for (std::size_t c = 0; c < width; ++c) total[c] = h[0](0, c);
  for (std::size_t layer = 0; layer < l.layers; ++layer) {
    std::vector<Matrix<double>> next;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> nb;
      std::vector<double> d;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || !store.has_edge(Relation::connect, pair.nodes[i], pair.nodes[j])) continue;
        nb.push_back(j);
        d.push_back(cosine_clamped(mean_rows(skill_table, skills.member_skills[pair.nodes[j]]), job_mean));
      }
      double sum = 0;
      for (double v : d) sum += v;
      Matrix<double> msg(1, width);
      for (std::size_t t = 0; t < nb.size(); ++t) {
        const double a = sum > 0 ? d[t] / sum : 1.0 / static_cast<double>(nb.size());
        for (std::size_t c = 0; c < width; ++c) msg(0, c) += a * h[nb[t]](0, c);
      }
      auto out = matmul(h[i], p.value(l.w1[layer]));
      if (!nb.empty()) {
        const auto m2 = matmul(msg, p.value(l.w2[layer]));
        for (std::size_t c = 0; c < width; ++c) out(0, c) += m2(0, c);
      }
      for (double& v : out.values()) v = std::max(v, 0.0);
      next.push_back(out);
    }
    h = std::move(next);
    for (std::size_t c = 0; c < width; ++c) total[c] += h[0](0, c);
  }
  for (double& v : total) v /= static_cast<double>(l.layers + 1);
  return total;
}

}  // namespace whinpjf::testing
