#include "whinpjf/sampling/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "whinpjf/common/error.hpp"

namespace whinpjf::sampling {

using graph::EntityKind;
using graph::Relation;
using graph::RelationView;

void SamplerConfig::validate() const {
  if (hops == 0) throw ConfigError("sampler: hops must be >= 1");
  if (fanout == 0) throw ConfigError("sampler: fanout must be >= 1");
  if (negative_ratio == 0) throw ConfigError("sampler: negative ratio must be >= 1");
  if (skill_samples == 0) throw ConfigError("sampler: n_s must be >= 1");
}

std::optional<std::uint32_t> SubgraphBatch::local(EntityRef e) const {
  const auto it = index_.find(key(e));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t SubgraphBatch::require_local(EntityRef e) const {
  if (auto l = local(e)) return *l;
  throw ContractError("entity " + graph::to_string(e) + " is not in the sampled subgraph");
}

std::size_t SubgraphBatch::edge_count() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.size();
  return n;
}

bool SubgraphBatch::add_node(EntityRef e) {
  auto [it, inserted] = index_.emplace(key(e), static_cast<std::uint32_t>(nodes.size()));
  if (inserted) nodes.push_back(e);
  return inserted;
}

namespace {

void expand(const WhinStore& store, SubgraphBatch& batch, std::vector<EntityRef> frontier,
            const SamplerConfig& cfg, Rng& rng) {
  const auto views = graph::all_views();
  for (std::uint32_t hop = 0; hop < cfg.hops && !frontier.empty(); ++hop) {
    std::vector<EntityRef> next;
    for (EntityRef u : frontier) {
      for (const RelationView& view : views) {
        if (graph::view_source(view) != u.kind) continue;
        const auto nb = store.neighbors(u, view);
        if (nb.empty()) continue;
        const EntityKind dst = graph::view_destination(view);
        const auto n = static_cast<std::uint32_t>(nb.size());
        if (n <= cfg.fanout) {
          for (std::uint32_t v : nb) {
            if (batch.add_node({dst, v})) next.push_back({dst, v});
          }
        } else {
          for (std::uint32_t i : rng.choose_sorted(n, cfg.fanout)) {
            if (batch.add_node({dst, nb[i]})) next.push_back({dst, nb[i]});
          }
        }
      }
    }
    frontier = std::move(next);
  }
}

/// Induced closure: every store edge whose endpoints are both in the batch.
void close(const WhinStore& store, SubgraphBatch& batch) {
  const auto views = graph::all_views();
  for (std::size_t vi = 0; vi < views.size(); ++vi) {
    const RelationView view = views[vi];
    const EntityKind src = graph::view_source(view);
    const EntityKind dst = graph::view_destination(view);
    auto& out = batch.edges[vi];
    out.clear();
    for (std::uint32_t local_u = 0; local_u < batch.nodes.size(); ++local_u) {
      const EntityRef u = batch.nodes[local_u];
      if (u.kind != src) continue;
      for (std::uint32_t v : store.neighbors(u, view)) {
        if (auto local_v = batch.local({dst, v})) out.emplace_back(local_u, *local_v);
      }
    }
    std::sort(out.begin(), out.end());
  }
}

}  // namespace

SubgraphBatch sample_subgraph(const WhinStore& store, std::span<const EntityRef> seeds,
                              const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  if (seeds.empty()) throw ContractError("sample_subgraph: no seeds");
  SubgraphBatch batch;
  std::vector<EntityRef> frontier;
  for (EntityRef s : seeds) {
    if (!store.contains(s)) throw ContractError("sample_subgraph: unknown seed " + graph::to_string(s));
    if (batch.add_node(s)) frontier.push_back(s);
  }
  batch.seed_count = batch.nodes.size();
  expand(store, batch, std::move(frontier), cfg, rng);
  close(store, batch);

  // Positives: canonical forward edges touching a seed.
  for (Relation r : graph::all_relations()) {
    const bool symmetric = graph::info(r).symmetric;
    for (const auto& [lu, lv] : batch.edges[graph::view_index({r, false})]) {
      if (lu >= batch.seed_count && lv >= batch.seed_count) continue;
      const std::uint32_t su = batch.nodes[lu].id;
      const std::uint32_t sv = batch.nodes[lv].id;
      if (symmetric && su > sv) continue;
      batch.positives.push_back({su, r, sv});
    }
  }
  return batch;
}

void extend_subgraph(const WhinStore& store, SubgraphBatch& batch, std::span<const EntityRef> extra,
                     const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<EntityRef> frontier;
  for (EntityRef e : extra) {
    if (!store.contains(e)) throw ContractError("extend_subgraph: unknown entity " + graph::to_string(e));
    if (batch.add_node(e)) frontier.push_back(e);
  }
  if (frontier.empty()) return;
  expand(store, batch, std::move(frontier), cfg, rng);
  close(store, batch);
}

SubgraphBatch whole_graph(const WhinStore& store) {
  SubgraphBatch batch;
  for (graph::EntityKind kind : graph::kAllEntityKinds) {
    for (std::uint32_t id = 0; id < store.count(kind); ++id) batch.add_node({kind, id});
  }
  close(store, batch);
  return batch;
}

std::vector<LinkTriple> sample_negatives(const WhinStore& store,
                                         std::span<const LinkTriple> positives,
                                         std::uint32_t ratio, Rng& rng) {
  if (positives.empty()) throw ContractError("sample_negatives: no positives");
  if (ratio == 0) throw ConfigError("sample_negatives: ratio must be >= 1");
  std::vector<LinkTriple> out;
  out.reserve(positives.size() * ratio);
  std::set<LinkTriple> drawn;
  constexpr int kRejectionBudget = 64;

  for (const LinkTriple& p : positives) {
    const auto& ri = graph::info(p.relation);
    const std::uint32_t n = store.count(ri.destination);
    if (n <= 1) {
      throw SamplingError("cannot corrupt relation " + std::string(ri.name) + ": destination kind " +
                          std::string(graph::to_string(ri.destination)) + " has " +
                          std::to_string(n) + " entities");
    }
    const bool same_kind = ri.source == ri.destination;
    auto valid = [&](std::uint32_t d) {
      if (same_kind && d == p.source) return false;
      if (store.has_edge(p.relation, p.source, d)) return false;
      return drawn.count({p.source, p.relation, d}) == 0;
    };
    for (std::uint32_t k = 0; k < ratio; ++k) {
      std::optional<std::uint32_t> pick;
      for (int attempt = 0; attempt < kRejectionBudget && !pick; ++attempt) {
        const auto d = static_cast<std::uint32_t>(rng.below(n));
        if (valid(d)) pick = d;
      }
      if (!pick) {
        // Dense neighborhood: draw uniformly from the explicit valid set.
        std::vector<std::uint32_t> candidates;
        for (std::uint32_t d = 0; d < n; ++d) {
          if (valid(d)) candidates.push_back(d);
        }
        if (candidates.empty()) {
          throw SamplingError("no valid negative destination for " + graph::to_string(EntityRef{ri.source, p.source}) +
                              " under relation " + std::string(ri.name));
        }
        pick = candidates[rng.below(candidates.size())];
      }
      const LinkTriple neg{p.source, p.relation, *pick};
      drawn.insert(neg);
      out.push_back(neg);
    }
  }
  return out;
}

std::vector<std::uint32_t> sample_skills(std::span<const std::uint32_t> skills, std::uint32_t n_s,
                                         Rng& rng) {
  if (skills.size() <= n_s) return {skills.begin(), skills.end()};
  std::vector<std::uint32_t> out;
  out.reserve(n_s);
  for (std::uint32_t i : rng.choose_sorted(static_cast<std::uint32_t>(skills.size()), n_s)) {
    out.push_back(skills[i]);
  }
  return out;
}

double node_budget(std::size_t seeds, const SamplerConfig& cfg, std::size_t active_views) {
  double total = 1.0;
  const double branch = static_cast<double>(cfg.fanout) * static_cast<double>(active_views);
  for (std::uint32_t h = 1; h <= cfg.hops; ++h) total += std::pow(branch, h);
  return static_cast<double>(seeds) * total;
}

}  // namespace whinpjf::sampling
