#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "whinpjf/common/manifest.hpp"
#include "whinpjf/eval/metrics.hpp"
#include "whinpjf/graph/store.hpp"

namespace whinpjf::eval {

struct SplitSpec {
  std::array<double, 3> ratios{8.0, 1.0, 1.0};  ///< train : valid : test
  std::uint64_t seed = 0;

  /// Throws ConfigError unless every ratio is positive and finite.
  void validate() const;
};

struct Split {
  std::vector<graph::CandidatePair> train, valid, test;
};

/// Seeded shuffle, then a contiguous cut at floor(n * r_train) and
/// floor(n * r_valid). Needs at least 10 pairs.
Split split(std::span<const graph::CandidatePair> pairs, const SplitSpec& spec);

/// Metrics stored x100.
struct MetricsReport {
  double auc = 0.0;
  double acc = 0.0;
  double f1 = 0.0;
  double ap = 0.0;
  std::size_t train_pairs = 0;
  std::size_t valid_pairs = 0;
  std::size_t test_pairs = 0;
  std::string split_name = "test";
  Manifest config;  ///< echo of the producing configuration

  /// `key=value` lines followed by a JSON block.
  std::string to_string() const;
  void save(const std::filesystem::path& path) const;
};

/// Evaluates `scored` (the pairs of one split) at threshold 0.5.
MetricsReport make_report(std::span<const ScoredPair> scored, const Split& split, std::string split_name,
                          Manifest config);

}  // namespace whinpjf::eval
