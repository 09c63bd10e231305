#include "whinpjf/eval/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "whinpjf/common/error.hpp"

namespace whinpjf::eval {

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney: rank sum of positives with mid-ranks for ties.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        rank_sum += mid_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw DegenerateError("auc is undefined without both positive and negative examples");
  }
  const double p = static_cast<double>(positives);
  return (rank_sum - p * (p + 1) / 2) / (p * static_cast<double>(negatives));
}

double auc(std::span<const ScoredPair> scored) {
  std::vector<double> s;
  std::vector<std::uint8_t> l;
  s.reserve(scored.size());
  l.reserve(scored.size());
  for (const auto& p : scored) {
    s.push_back(p.score);
    l.push_back(p.label);
  }
  return auc(s, l);
}

Classification acc_f1_ap(std::span<const ScoredPair> scored, double threshold) {
  if (scored.empty()) throw EmptyInputError("acc_f1_ap: no scored pairs");
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0, positives = 0;
  for (const auto& p : scored) {
    const bool predicted = p.score >= threshold;
    const bool actual = p.label == 1;
    positives += actual;
    if (predicted == actual) ++correct;
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && actual) ++fn;
  }
  Classification out;
  out.acc = static_cast<double>(correct) / static_cast<double>(scored.size());
  const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  out.f1 = precision + recall == 0 ? 0.0 : 2 * precision * recall / (precision + recall);

  if (positives > 0) {
    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scored[a].score > scored[b].score; });
    std::size_t hits = 0;
    double ap = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (scored[order[k]].label == 1) {
        ++hits;
        // Recall rises by 1/positives exactly at each hit.
        ap += static_cast<double>(hits) / static_cast<double>(k + 1);
      }
    }
    out.ap = ap / static_cast<double>(positives);
  }
  return out;
}

}  // namespace whinpjf::eval
