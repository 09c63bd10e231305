#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "whinpjf/common/random.hpp"
#include "whinpjf/graph/store.hpp"

namespace whinpjf::sampling {

using graph::EntityRef;
using graph::LinkTriple;
using graph::WhinStore;

struct SamplerConfig {
  std::uint32_t hops = 3;
  std::uint32_t fanout = 5;
  std::uint32_t negative_ratio = 1;
  std::uint32_t skill_samples = 10;  ///< n_s
  std::uint64_t seed = 0;

  /// Throws ConfigError when any field is zero.
  void validate() const;
};

using LocalEdge = std::pair<std::uint32_t, std::uint32_t>;

/// Sampled node set with re-indexed edges and link samples for one step.
struct SubgraphBatch {
  std::vector<EntityRef> nodes;  ///< local index -> entity
  std::size_t seed_count = 0;    ///< the first seed_count nodes are the seeds
  /// Per relation view, sorted (local source, local destination) pairs.
  std::array<std::vector<LocalEdge>, graph::kViewCount> edges;
  std::vector<LinkTriple> positives;  ///< per-kind store ids
  std::vector<LinkTriple> negatives;

  std::optional<std::uint32_t> local(EntityRef e) const;
  std::uint32_t require_local(EntityRef e) const;
  std::size_t edge_count() const;

  /// Appends e unless present; true when it was new.
  bool add_node(EntityRef e);

 private:
  static std::uint64_t key(EntityRef e) {
    return (static_cast<std::uint64_t>(graph::index_of(e.kind)) << 32) | e.id;
  }
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

/// Fanout-limited k-hop expansion from `seeds`, then induced closure over
/// every relation view. Positives are the induced edges incident to a seed
/// (natural relations and metapaths, one triple per canonical edge).
/// Negatives are left empty; see sample_negatives.
SubgraphBatch sample_subgraph(const WhinStore& store, std::span<const EntityRef> seeds,
                              const SamplerConfig& cfg, Rng& rng);

/// Adds `extra` nodes (and their fanout-limited k-hop neighborhoods) to a
/// batch and recomputes the induced closure. Positives are unchanged.
void extend_subgraph(const WhinStore& store, SubgraphBatch& batch, std::span<const EntityRef> extra,
                     const SamplerConfig& cfg, Rng& rng);

/// Every entity and every edge of the store as one batch (no link samples).
SubgraphBatch whole_graph(const WhinStore& store);

/// `ratio` destination-corrupted triples per positive. A corrupted
/// destination is uniform over the destination kind, excluding existing
/// edges, self-loops and earlier negatives with the same (source, relation).
std::vector<LinkTriple> sample_negatives(const WhinStore& store,
                                         std::span<const LinkTriple> positives,
                                         std::uint32_t ratio, Rng& rng);

/// At most n_s elements, uniformly without replacement, in original order.
std::vector<std::uint32_t> sample_skills(std::span<const std::uint32_t> skills, std::uint32_t n_s,
                                         Rng& rng);

/// Upper bound on |nodes| for a batch: seeds * (1 + sum_h (fanout * views)^h).
double node_budget(std::size_t seeds, const SamplerConfig& cfg, std::size_t active_views);

}  // namespace whinpjf::sampling
