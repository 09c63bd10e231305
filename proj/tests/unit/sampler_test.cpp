#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "whinpjf/common/error.hpp"
#include "whinpjf/graph/io.hpp"
#include "whinpjf/sampling/sampler.hpp"

namespace whinpjf::sampling {
namespace {

using graph::EntityKind;
using graph::Relation;
using graph::RelationView;
using graph::StoreBuilder;

WhinStore star_store(std::uint32_t spokes) {
  StoreBuilder b;
  for (std::uint32_t i = 0; i <= spokes; ++i) b.add_entity(EntityKind::member, i, "m");
  for (std::uint32_t i = 1; i <= spokes; ++i) b.add_edge(Relation::connect, 0, i);
  return b.build();
}

WhinStore random_store(Rng& rng, std::uint32_t members, std::uint32_t jobs, std::uint32_t skills,
                       double density) {
  StoreBuilder b;
  for (std::uint32_t i = 0; i < members; ++i) b.add_entity(EntityKind::member, i, "m");
  for (std::uint32_t i = 0; i < jobs; ++i) b.add_entity(EntityKind::job, i, "j");
  for (std::uint32_t i = 0; i < skills; ++i) b.add_entity(EntityKind::skill, i, "s");
  for (std::uint32_t a = 0; a < members; ++a) {
    for (std::uint32_t c = a + 1; c < members; ++c) {
      if (rng.bernoulli(density)) b.add_edge(Relation::connect, a, c);
    }
    for (std::uint32_t j = 0; j < jobs; ++j) {
      if (rng.bernoulli(density)) b.add_edge(Relation::apply, a, j);
    }
    for (std::uint32_t s = 0; s < skills; ++s) {
      if (rng.bernoulli(density)) b.add_edge(Relation::master, a, s);
    }
  }
  for (std::uint32_t j = 0; j < jobs; ++j) {
    for (std::uint32_t s = 0; s < skills; ++s) {
      if (rng.bernoulli(density)) b.add_edge(Relation::require, j, s);
    }
  }
  return graph::materialize_metapaths(b.build(), graph::kUnlimitedCap, 1);
}

TEST(SampleSubgraph, DegreeBelowFanoutTakesAll) {
  const WhinStore s = star_store(3);
  SamplerConfig cfg;
  cfg.hops = 1;
  Rng rng(1);
  const EntityRef seeds[] = {graph::member(0)};
  const auto batch = sample_subgraph(s, seeds, cfg, rng);
  EXPECT_EQ(batch.nodes.size(), 4u);
}

TEST(SampleSubgraph, FanoutLimitsDistinctNeighbors) {
  const WhinStore s = star_store(20);
  SamplerConfig cfg;
  cfg.hops = 1;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const EntityRef seeds[] = {graph::member(0)};
    const auto batch = sample_subgraph(s, seeds, cfg, rng);
    ASSERT_EQ(batch.nodes.size(), 6u);
    std::set<std::uint32_t> ids;
    for (const auto& n : batch.nodes) ids.insert(n.id);
    ASSERT_EQ(ids.size(), 6u);
  }
}

TEST(SampleSubgraph, UnknownSeedIsContractError) {
  const WhinStore s = star_store(2);
  Rng rng(1);
  const EntityRef seeds[] = {graph::member(9)};
  EXPECT_THROW(sample_subgraph(s, seeds, SamplerConfig{}, rng), ContractError);
  EXPECT_THROW(sample_subgraph(s, std::span<const EntityRef>{}, SamplerConfig{}, rng), ContractError);
}

TEST(SampleSubgraph, InducedClosureMatchesBruteForce) {
  Rng gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    // 8 entities in total: 4 members, 2 jobs, 2 skills.
    const WhinStore s = random_store(gen, 4, 2, 2, 0.5);
    SamplerConfig cfg;
    cfg.hops = 1;
    cfg.fanout = 1;
    Rng rng(trial);
    const EntityRef seeds[] = {graph::member(0)};
    const auto batch = sample_subgraph(s, seeds, cfg, rng);
    std::set<EntityRef> sampled(batch.nodes.begin(), batch.nodes.end());
    const auto views = graph::all_views();
    for (std::size_t vi = 0; vi < views.size(); ++vi) {
      std::set<std::pair<EntityRef, EntityRef>> expected, actual;
      const EntityKind src = graph::view_source(views[vi]);
      for (std::uint32_t u = 0; u < s.count(src); ++u) {
        for (EntityRef v : s.neighbor_refs({src, u}, views[vi])) {
          if (sampled.count({src, u}) && sampled.count(v)) expected.emplace(EntityRef{src, u}, v);
        }
      }
      for (const auto& [a, b] : batch.edges[vi]) actual.emplace(batch.nodes[a], batch.nodes[b]);
      ASSERT_EQ(actual, expected) << graph::view_name(views[vi]);
    }
  }
}

TEST(SampleSubgraph, PositivesAreStoreEdgesTouchingSeeds) {
  Rng gen(3);
  const WhinStore s = random_store(gen, 12, 6, 5, 0.3);
  Rng rng(4);
  const EntityRef seeds[] = {graph::member(0), graph::job(1)};
  const auto batch = sample_subgraph(s, seeds, SamplerConfig{}, rng);
  ASSERT_FALSE(batch.positives.empty());
  std::set<LinkTriple> unique(batch.positives.begin(), batch.positives.end());
  EXPECT_EQ(unique.size(), batch.positives.size());
  for (const auto& p : batch.positives) {
    ASSERT_TRUE(s.has_edge(p.relation, p.source, p.destination));
    const auto& ri = graph::info(p.relation);
    const bool touches = (EntityRef{ri.source, p.source} == seeds[0] || EntityRef{ri.source, p.source} == seeds[1] ||
                          EntityRef{ri.destination, p.destination} == seeds[0] ||
                          EntityRef{ri.destination, p.destination} == seeds[1]);
    ASSERT_TRUE(touches);
    ASSERT_TRUE(batch.local({ri.source, p.source}).has_value());
    ASSERT_TRUE(batch.local({ri.destination, p.destination}).has_value());
  }
}

TEST(SampleSubgraph, ReproducibleAndWithinNodeBudget) {
  Rng gen(5);
  const WhinStore s = random_store(gen, 40, 20, 15, 0.1);
  SamplerConfig cfg;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EntityRef seeds[] = {graph::member(static_cast<std::uint32_t>(seed)), graph::job(3)};
    Rng a(seed), b(seed);
    const auto x = sample_subgraph(s, seeds, cfg, a);
    const auto y = sample_subgraph(s, seeds, cfg, b);
    EXPECT_EQ(x.nodes, y.nodes);
    EXPECT_EQ(x.edges, y.edges);
    EXPECT_EQ(x.positives, y.positives);
    EXPECT_LE(static_cast<double>(x.nodes.size()), node_budget(2, cfg, graph::kViewCount));
  }
}

TEST(SampleNegatives, ForcedChoice) {
  const WhinStore s = graph::ingest_text("member\t0\ta\njob\t0\tx\njob\t1\ty\n", "apply\t0\t0\n", "");
  const LinkTriple pos[] = {{0, Relation::apply, 0}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto neg = sample_negatives(s, pos, 1, rng);
    ASSERT_EQ(neg.size(), 1u);
    EXPECT_EQ(neg[0], (LinkTriple{0, Relation::apply, 1}));
  }
}

TEST(SampleNegatives, ExactCountNoneInStore) {
  Rng gen(6);
  const WhinStore s = random_store(gen, 40, 20, 16, 0.1);
  Rng rng(7);
  const EntityRef seeds[] = {graph::member(2)};
  auto batch = sample_subgraph(s, seeds, SamplerConfig{}, rng);
  std::vector<LinkTriple> pos(batch.positives.begin(), batch.positives.begin() + 10);
  for (std::uint32_t ratio : {1u, 2u}) {
    const auto neg = sample_negatives(s, pos, ratio, rng);
    ASSERT_EQ(neg.size(), ratio * pos.size());
    for (const auto& n : neg) {
      ASSERT_FALSE(s.has_edge(n.relation, n.source, n.destination));
      if (graph::info(n.relation).source == graph::info(n.relation).destination) {
        ASSERT_NE(n.source, n.destination);
      }
    }
    ASSERT_EQ(std::set<LinkTriple>(neg.begin(), neg.end()).size(), neg.size());
  }
}

TEST(SampleNegatives, SingleDestinationIsSamplingError) {
  const WhinStore s = graph::ingest_text("member\t0\ta\njob\t0\tx\n", "apply\t0\t0\n", "");
  const LinkTriple pos[] = {{0, Relation::apply, 0}};
  Rng rng(1);
  EXPECT_THROW(sample_negatives(s, pos, 1, rng), SamplingError);
  const WhinStore full = graph::ingest_text("member\t0\ta\njob\t0\tx\njob\t1\ty\n",
                                            "apply\t0\t0\napply\t0\t1\n", "");
  EXPECT_THROW(sample_negatives(full, pos, 1, rng), SamplingError);
}

TEST(SampleNegatives, DestinationsUniformByChiSquare) {
  // Six jobs; m0 applied only to j5, so the valid destinations are j0..j4.
  const WhinStore s = graph::ingest_text(
      "member\t0\ta\njob\t0\tx\njob\t1\tx\njob\t2\tx\njob\t3\tx\njob\t4\tx\njob\t5\tx\n",
      "apply\t0\t5\n", "");
  const LinkTriple pos[] = {{0, Relation::apply, 5}};
  Rng rng(8);
  std::array<double, 5> counts{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) counts[sample_negatives(s, pos, 1, rng)[0].destination] += 1;
  double chi2 = 0;
  for (double c : counts) chi2 += (c - draws / 5.0) * (c - draws / 5.0) / (draws / 5.0);
  // 99th percentile of chi-square with 4 degrees of freedom.
  EXPECT_LT(chi2, 13.276704135987622);
}

TEST(SampleSkills, SmallSetReturnedInOrder) {
  const std::vector<std::uint32_t> skills = {9, 3, 7, 1};
  Rng rng(1);
  EXPECT_EQ(sample_skills(skills, 10, rng), skills);
}

TEST(SampleSkills, LargeSetGivesDistinctSubset) {
  std::vector<std::uint32_t> skills(100);
  for (std::uint32_t i = 0; i < 100; ++i) skills[i] = 1000 + i;
  Rng rng(2);
  const auto out = sample_skills(skills, 10, rng);
  ASSERT_EQ(out.size(), 10u);
  EXPECT_EQ(std::set<std::uint32_t>(out.begin(), out.end()).size(), 10u);
  for (auto v : out) EXPECT_GE(v, 1000u);
}

TEST(SampleSkills, InclusionFrequencyWithinBinomialBounds) {
  const std::uint32_t n = 25, k = 10;
  std::vector<std::uint32_t> skills(n);
  for (std::uint32_t i = 0; i < n; ++i) skills[i] = i;
  Rng rng(3);
  std::vector<int> hits(n, 0);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    for (auto v : sample_skills(skills, k, rng)) ++hits[v];
  }
  const double p = static_cast<double>(k) / n;
  const double sigma = std::sqrt(trials * p * (1 - p));
  for (int h : hits) EXPECT_NEAR(h, trials * p, 3 * sigma);
}

TEST(SamplerConfig, ZeroFieldsRejected) {
  SamplerConfig cfg;
  cfg.hops = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.skill_samples = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace whinpjf::sampling
