#include "whinpjf/graph/store.hpp"

#include <algorithm>
#include <map>

#include "whinpjf/common/error.hpp"
#include "whinpjf/common/random.hpp"

namespace whinpjf::graph {

// ------------------------------------------------------------------ WhinStore

void WhinStore::require_entity(EntityRef ref) const {
  if (!contains(ref)) {
    throw ContractError("unknown entity " + to_string(ref) + " (store has " +
                        std::to_string(count(ref.kind)) + " " + std::string(to_string(ref.kind)) +
                        " entities)");
  }
}

void WhinStore::finalize_offsets() {
  kind_offset_[0] = 0;
  for (std::size_t k = 0; k < kEntityKindCount; ++k) kind_offset_[k + 1] = kind_offset_[k] + counts_[k];
}

const std::string& WhinStore::text(EntityRef ref) const {
  require_entity(ref);
  return texts_[index_of(ref.kind)][ref.id];
}

std::span<const std::uint32_t> WhinStore::neighbors(EntityRef entity, Relation relation) const {
  return neighbors(entity, RelationView{relation, false});
}

std::span<const std::uint32_t> WhinStore::neighbors(EntityRef entity, RelationView view) const {
  if (entity.kind != view_source(view)) {
    throw ContractError("relation view '" + view_name(view) + "' starts at " +
                        std::string(to_string(view_source(view))) + " entities, got " +
                        to_string(entity));
  }
  require_entity(entity);
  return views_[view_index(view)].of(entity.id);
}

std::vector<EntityRef> WhinStore::neighbor_refs(EntityRef entity, RelationView view) const {
  const auto ids = neighbors(entity, view);
  const EntityKind kind = view_destination(view);
  std::vector<EntityRef> out;
  out.reserve(ids.size());
  for (std::uint32_t id : ids) out.push_back({kind, id});
  return out;
}

bool WhinStore::has_edge(Relation relation, std::uint32_t source, std::uint32_t destination) const {
  const auto& adj = views_[view_index(RelationView{relation, false})];
  if (source + 1 >= adj.offsets.size()) return false;
  const auto list = adj.of(source);
  return std::binary_search(list.begin(), list.end(), destination);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> WhinStore::edges(Relation relation) const {
  const auto& adj = views_[view_index(RelationView{relation, false})];
  const bool symmetric = info(relation).symmetric;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t s = 0; s + 1 < adj.offsets.size(); ++s) {
    for (std::uint32_t d : adj.of(s)) {
      if (!symmetric || s < d) out.emplace_back(s, d);
    }
  }
  return out;
}

std::size_t WhinStore::edge_count(Relation relation) const {
  const auto& adj = views_[view_index(RelationView{relation, false})];
  return info(relation).symmetric ? adj.targets.size() / 2 : adj.targets.size();
}

EntityRef WhinStore::entity(std::uint32_t global) const {
  for (std::size_t k = 0; k < kEntityKindCount; ++k) {
    if (global < kind_offset_[k + 1]) {
      return EntityRef{static_cast<EntityKind>(k), global - kind_offset_[k]};
    }
  }
  throw ContractError("global node id " + std::to_string(global) + " out of range");
}

// --------------------------------------------------------------- construction

Adjacency build_adjacency(std::uint32_t source_count,
                          std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Adjacency adj;
  adj.offsets.assign(source_count + 1, 0);
  for (const auto& [s, d] : edges) ++adj.offsets[s + 1];
  for (std::uint32_t s = 0; s < source_count; ++s) adj.offsets[s + 1] += adj.offsets[s];
  adj.targets.reserve(edges.size());
  for (const auto& e : edges) adj.targets.push_back(e.second);
  return adj;
}

namespace {

/// Fills the forward and (when directed) reverse views of one relation.
void install_relation(std::array<Adjacency, kViewCount>& views,
                      const std::array<std::uint32_t, kEntityKindCount>& counts, Relation r,
                      const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  const RelationInfo& ri = info(r);
  const std::uint32_t n_src = counts[index_of(ri.source)];
  const std::uint32_t n_dst = counts[index_of(ri.destination)];
  if (ri.symmetric) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> both;
    both.reserve(edges.size() * 2);
    for (const auto& [a, b] : edges) {
      both.emplace_back(a, b);
      both.emplace_back(b, a);
    }
    views[view_index({r, false})] = build_adjacency(n_src, std::move(both));
  } else {
    views[view_index({r, false})] = build_adjacency(n_src, edges);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> rev;
    rev.reserve(edges.size());
    for (const auto& [a, b] : edges) rev.emplace_back(b, a);
    views[view_index({r, true})] = build_adjacency(n_dst, std::move(rev));
  }
}

}  // namespace

void StoreBuilder::add_entity(EntityKind kind, std::uint32_t id, std::string text) {
  entities_[index_of(kind)].push_back({id, std::move(text)});
}

void StoreBuilder::add_edge(Relation relation, std::uint32_t source, std::uint32_t destination) {
  edges_[index_of(relation)].emplace_back(source, destination);
}

void StoreBuilder::add_pair(std::uint32_t member, std::uint32_t job, std::uint8_t label) {
  pairs_.push_back({member, job, label});
}

WhinStore StoreBuilder::build() const {
  WhinStore store;
  for (EntityKind kind : kAllEntityKinds) {
    auto pending = entities_[index_of(kind)];
    std::sort(pending.begin(), pending.end(),
              [](const PendingEntity& a, const PendingEntity& b) { return a.id < b.id; });
    auto& texts = store.texts_[index_of(kind)];
    texts.reserve(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (pending[i].id != i) {
        if (pending[i].id < i) {
          throw IntegrityError("duplicate entity " + to_string(EntityRef{kind, pending[i].id}));
        }
        throw IntegrityError("entity ids must be dense: missing " +
                             to_string(EntityRef{kind, static_cast<std::uint32_t>(i)}));
      }
      texts.push_back(pending[i].text);
    }
    store.counts_[index_of(kind)] = static_cast<std::uint32_t>(pending.size());
  }
  store.finalize_offsets();

  for (Relation r : all_relations()) {
    const RelationInfo& ri = info(r);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(edges_[index_of(r)].size());
    for (auto [s, d] : edges_[index_of(r)]) {
      if (s >= store.count(ri.source) || d >= store.count(ri.destination)) {
        const EntityRef bad = s >= store.count(ri.source) ? EntityRef{ri.source, s}
                                                          : EntityRef{ri.destination, d};
        throw IntegrityError("relation " + std::string(ri.name) + " references unknown entity " +
                             to_string(bad));
      }
      if (ri.symmetric) {
        if (s == d) {
          throw IntegrityError("relation " + std::string(ri.name) + " has a self-loop on " +
                               to_string(EntityRef{ri.source, s}));
        }
        if (s > d) std::swap(s, d);
      }
      edges.emplace_back(s, d);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    install_relation(store.views_, store.counts_, r, edges);
  }

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint8_t> seen;
  for (const CandidatePair& p : pairs_) {
    if (p.member >= store.count(EntityKind::member) || p.job >= store.count(EntityKind::job)) {
      throw IntegrityError("candidate pair references unknown entity (member " +
                           std::to_string(p.member) + ", job " + std::to_string(p.job) + ")");
    }
    if (p.label > 1) throw IntegrityError("candidate pair label must be 0 or 1");
    auto [it, inserted] = seen.emplace(std::make_pair(p.member, p.job), p.label);
    if (!inserted) {
      if (it->second != p.label) {
        throw IntegrityError("candidate pair (member " + std::to_string(p.member) + ", job " +
                             std::to_string(p.job) + ") listed with conflicting labels");
      }
      continue;
    }
    store.pairs_.push_back(p);
  }
  store.metapaths_ = metapaths_;
  return store;
}

// ------------------------------------------------------------------ metapaths

namespace {

/// All unordered pairs of entities sharing at least one intermediate.
std::vector<std::pair<std::uint32_t, std::uint32_t>> shared_neighbor_pairs(const Adjacency& by_intermediate) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t mid = 0; mid + 1 < by_intermediate.offsets.size(); ++mid) {
    const auto group = by_intermediate.of(mid);
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) out.emplace_back(group[i], group[j]);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> apply_degree_cap(
    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates, std::uint32_t node_count,
    std::uint32_t cap, Rng rng) {
  std::vector<std::uint32_t> degree(node_count, 0);
  for (const auto& [a, b] : candidates) {
    ++degree[a];
    ++degree[b];
  }
  const bool over = std::any_of(degree.begin(), degree.end(), [cap](std::uint32_t d) { return d > cap; });
  if (!over) return candidates;
  rng.shuffle(candidates);
  std::fill(degree.begin(), degree.end(), 0);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> kept;
  for (const auto& [a, b] : candidates) {
    if (degree[a] < cap && degree[b] < cap) {
      ++degree[a];
      ++degree[b];
      kept.emplace_back(a, b);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

WhinStore materialize_metapaths(const WhinStore& store, std::uint32_t cap, std::uint64_t seed) {
  if (cap == 0) throw ConfigError("metapath degree cap must be positive");
  WhinStore out = store;
  const Rng root(seed);

  // Applicants grouped by job give member pairs; jobs grouped by member give job pairs.
  const Adjacency& applicants = store.adjacency({Relation::apply, true});
  const Adjacency& applied = store.adjacency({Relation::apply, false});

  auto co_apply = apply_degree_cap(shared_neighbor_pairs(applicants), store.count(EntityKind::member),
                                   cap, root.substream("co_apply"));
  auto co_applied = apply_degree_cap(shared_neighbor_pairs(applied), store.count(EntityKind::job),
                                     cap, root.substream("co_applied"));

  install_relation(out.views_, out.counts_, Relation::co_apply, co_apply);
  install_relation(out.views_, out.counts_, Relation::co_applied, co_applied);
  out.metapaths_ = MetapathSettings{true, cap, seed};
  return out;
}

WhinStore without_links(const WhinStore& store, std::span<const LinkTriple> removed) {
  std::vector<LinkTriple> drop(removed.begin(), removed.end());
  for (LinkTriple& t : drop) {
    if (info(t.relation).symmetric && t.source > t.destination) std::swap(t.source, t.destination);
  }
  std::sort(drop.begin(), drop.end());
  StoreBuilder builder;
  for (EntityKind kind : kAllEntityKinds) {
    for (std::uint32_t id = 0; id < store.count(kind); ++id) {
      builder.add_entity(kind, id, store.text({kind, id}));
    }
  }
  for (Relation r : natural_relations()) {
    for (const auto& [s, d] : store.edges(r)) {
      if (!std::binary_search(drop.begin(), drop.end(), LinkTriple{s, r, d})) builder.add_edge(r, s, d);
    }
  }
  for (const CandidatePair& p : store.pairs()) builder.add_pair(p.member, p.job, p.label);
  return builder.build();
}

}  // namespace whinpjf::graph
