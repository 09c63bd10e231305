#pragma once

#include <cstdint>

#include "whinpjf/csagnn/model.hpp"
#include "whinpjf/eval/report.hpp"
#include "whinpjf/pretrain/rgcn.hpp"
#include "whinpjf/text/embedder.hpp"

namespace whinpjf::eval {

struct DataOptions {
  text::EmbedderConfig embedder;
  std::uint32_t metapath_cap = 50;
  std::uint64_t metapath_seed = 0;

  void to_manifest(Manifest& m) const;
  /// Reads the keys written by to_manifest; missing keys keep defaults.
  static DataOptions from_manifest(const Manifest& m);
};

/// A dataset ready for both training stages: metapaths materialized and
/// token features built.
struct PreparedData {
  graph::WhinStore store;
  text::TextTable text;
};

PreparedData prepare(const graph::WhinStore& natural, const DataOptions& options);

struct AblationConfig {
  csagnn::CsagnnConfig model;
  SplitSpec split;
};

/// Configuration echo shared by model manifests and reports.
Manifest to_manifest(const AblationConfig& cfg);

struct AblationRun {
  csagnn::CsagnnResult result;
  MetricsReport report;  ///< test split
};

/// Trains `variant` on the split's train part (early stopping on valid) and
/// reports test metrics. `structure` may be null only for wo_CSA_H; otherwise
/// DependencyError.
AblationRun run_ablation(csagnn::Variant variant, const PreparedData& data,
                         const pretrain::EmbeddingTable* structure, AblationConfig cfg);

}  // namespace whinpjf::eval
