#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "whinpjf/graph/store.hpp"

namespace whinpjf::eval {

/// A scored candidate pair flowing into the metrics.
struct ScoredPair {
  std::uint32_t member = 0;
  std::uint32_t job = 0;
  double score = 0.0;  ///< predicted probability
  std::uint8_t label = 0;
};

/// P(random positive outranks random negative), ties credited 0.5.
/// Throws DegenerateError unless both classes are present.
double auc(std::span<const ScoredPair> scored);
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct Classification {
  double acc = 0.0;
  double f1 = 0.0;
  double ap = 0.0;
};

/// Accuracy and F1 at `threshold`; average precision over the
/// score-descending ranking with ties kept in input order.
Classification acc_f1_ap(std::span<const ScoredPair> scored, double threshold = 0.5);

}  // namespace whinpjf::eval
