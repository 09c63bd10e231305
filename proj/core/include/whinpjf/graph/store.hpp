#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "whinpjf/graph/entity.hpp"

namespace whinpjf::graph {

/// Labeled (member, job) candidate pair.
struct CandidatePair {
  std::uint32_t member = 0;
  std::uint32_t job = 0;
  std::uint8_t label = 0;

  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

/// Compressed sorted adjacency for one relation view.
struct Adjacency {
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> targets;

  std::span<const std::uint32_t> of(std::uint32_t source) const {
    return {targets.data() + offsets[source], offsets[source + 1] - offsets[source]};
  }
  std::size_t degree(std::uint32_t source) const { return offsets[source + 1] - offsets[source]; }

  friend bool operator==(const Adjacency&, const Adjacency&) = default;
};

/// One typed link (source, relation, destination); ids are per-kind.
struct LinkTriple {
  std::uint32_t source = 0;
  Relation relation = Relation::connect;
  std::uint32_t destination = 0;

  friend auto operator<=>(const LinkTriple&, const LinkTriple&) = default;
};

inline constexpr std::uint32_t kUnlimitedCap = std::numeric_limits<std::uint32_t>::max();

struct MetapathSettings {
  bool materialized = false;
  std::uint32_t cap = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const MetapathSettings&, const MetapathSettings&) = default;
};

/// Immutable typed multigraph of the workplace network.
///
/// For every relation view the store holds the interaction map A_e^r as a
/// sorted neighbor list. Symmetric relations are stored in both directions.
class WhinStore {
 public:
  std::uint32_t count(EntityKind kind) const { return counts_[index_of(kind)]; }
  const std::string& text(EntityRef ref) const;

  /// Interaction map A_e^r for the forward direction of r.
  std::span<const std::uint32_t> neighbors(EntityRef entity, Relation relation) const;
  /// Interaction map along an explicit view (forward or reverse).
  std::span<const std::uint32_t> neighbors(EntityRef entity, RelationView view) const;
  std::vector<EntityRef> neighbor_refs(EntityRef entity, RelationView view) const;

  const Adjacency& adjacency(RelationView view) const { return views_[view_index(view)]; }

  bool has_edge(Relation relation, std::uint32_t source, std::uint32_t destination) const;

  /// Canonical edge list: (src, dst) for directed relations, (a, b) with
  /// a < b for symmetric ones. Sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges(Relation relation) const;
  std::size_t edge_count(Relation relation) const;

  std::span<const CandidatePair> pairs() const { return pairs_; }
  const MetapathSettings& metapaths() const { return metapaths_; }

  // Global node numbering: kinds laid out consecutively in EntityKind order.
  std::uint32_t node_count() const { return kind_offset_[kEntityKindCount]; }
  std::uint32_t global_id(EntityRef ref) const { return kind_offset_[index_of(ref.kind)] + ref.id; }
  EntityRef entity(std::uint32_t global) const;
  std::uint32_t kind_offset(EntityKind kind) const { return kind_offset_[index_of(kind)]; }

  bool contains(EntityRef ref) const { return ref.id < count(ref.kind); }

  friend bool operator==(const WhinStore&, const WhinStore&) = default;

 private:
  friend class StoreBuilder;
  friend WhinStore materialize_metapaths(const WhinStore&, std::uint32_t, std::uint64_t);

  void require_entity(EntityRef ref) const;
  void finalize_offsets();

  std::array<std::uint32_t, kEntityKindCount> counts_{};
  std::array<std::uint32_t, kEntityKindCount + 1> kind_offset_{};
  std::array<std::vector<std::string>, kEntityKindCount> texts_;
  std::array<Adjacency, kViewCount> views_;
  std::vector<CandidatePair> pairs_;
  MetapathSettings metapaths_;
};

/// Accumulates entities, edges and pairs, then validates into a WhinStore.
class StoreBuilder {
 public:
  void add_entity(EntityKind kind, std::uint32_t id, std::string text);
  void add_edge(Relation relation, std::uint32_t source, std::uint32_t destination);
  void add_pair(std::uint32_t member, std::uint32_t job, std::uint8_t label);
  void set_metapath_settings(MetapathSettings settings) { metapaths_ = settings; }

  /// Validates referential integrity, deduplicates edges and pairs.
  /// Throws IntegrityError on dangling references, missing or duplicate
  /// ids, self-loops and conflicting pair labels.
  WhinStore build() const;

 private:
  struct PendingEntity {
    std::uint32_t id;
    std::string text;
  };
  std::array<std::vector<PendingEntity>, kEntityKindCount> entities_;
  std::array<std::vector<std::pair<std::uint32_t, std::uint32_t>>, kRelationCount> edges_;
  std::vector<CandidatePair> pairs_;
  MetapathSettings metapaths_;
};

/// Builds a CSR adjacency over `source_count` sources from (src, dst) pairs.
Adjacency build_adjacency(std::uint32_t source_count,
                          std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);

/// Adds the co_apply (members sharing an applied job) and co_applied (jobs
/// sharing an applicant) metapaths. Each node keeps at most `cap` metapath
/// neighbors per metapath; when the full set exceeds the cap, candidate
/// edges are visited in a seeded random order and accepted while both
/// endpoints are below the cap. Pass kUnlimitedCap to keep every edge.
WhinStore materialize_metapaths(const WhinStore& store, std::uint32_t cap, std::uint64_t seed);

/// Copy of the natural part of `store` without the listed links. Metapaths
/// are dropped; re-materialize them on the result.
WhinStore without_links(const WhinStore& store, std::span<const LinkTriple> removed);

}  // namespace whinpjf::graph
