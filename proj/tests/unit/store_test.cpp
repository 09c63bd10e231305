#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include "support/oracles.hpp"
#include "whinpjf/common/error.hpp"
#include "whinpjf/common/random.hpp"
#include "whinpjf/graph/io.hpp"
#include "whinpjf/graph/store.hpp"

namespace whinpjf::graph {
namespace {

std::vector<std::uint32_t> to_vec(std::span<const std::uint32_t> s) { return {s.begin(), s.end()}; }

WhinStore small_store() {
  return ingest_text("member\t0\talice\nmember\t1\tbob\njob\t0\tengineer\n",
                     "apply\t0\t0\napply\t1\t0\n", "0\t0\t1\n");
}

/// Random bipartite member-job store with extra structure on other relations.
WhinStore random_store(Rng& rng, std::uint32_t members, std::uint32_t jobs, double p_apply,
                       std::vector<std::pair<std::uint32_t, std::uint32_t>>* applies = nullptr) {
  StoreBuilder b;
  for (std::uint32_t i = 0; i < members; ++i) b.add_entity(EntityKind::member, i, "m");
  for (std::uint32_t i = 0; i < jobs; ++i) b.add_entity(EntityKind::job, i, "j");
  for (std::uint32_t m = 0; m < members; ++m) {
    for (std::uint32_t j = 0; j < jobs; ++j) {
      if (rng.bernoulli(p_apply)) {
        b.add_edge(Relation::apply, m, j);
        if (applies) applies->emplace_back(m, j);
      }
    }
  }
  for (std::uint32_t m = 0; m + 1 < members; m += 2) b.add_edge(Relation::connect, m, m + 1);
  return b.build();
}

TEST(Ingest, ApplyInteractionMap) {
  const WhinStore s = small_store();
  EXPECT_EQ(s.count(EntityKind::member), 2u);
  EXPECT_EQ(s.count(EntityKind::job), 1u);
  EXPECT_EQ(s.neighbors(member(0), Relation::apply).size(), 1u);
  EXPECT_EQ(to_vec(s.neighbors(member(0), Relation::apply)), std::vector<std::uint32_t>{0});
  EXPECT_EQ(to_vec(s.neighbors(job(0), RelationView{Relation::apply, true})),
            (std::vector<std::uint32_t>{0, 1}));
}

TEST(Ingest, MemberWithoutApplicationsHasEmptyMap) {
  const WhinStore s = ingest_text("member\t0\ta\nmember\t1\tb\njob\t0\tc\n", "apply\t0\t0\n", "");
  EXPECT_TRUE(s.neighbors(member(1), Relation::apply).empty());
  EXPECT_TRUE(s.neighbors(member(1), Relation::connect).empty());
}

TEST(Ingest, DuplicateEdgeStoredOnce) {
  const WhinStore s = ingest_text("member\t0\ta\nmember\t1\tb\njob\t0\tc\n",
                                  "apply\t0\t0\napply\t0\t0\nconnect\t0\t1\nconnect\t1\t0\n", "");
  EXPECT_EQ(s.edge_count(Relation::apply), 1u);
  EXPECT_EQ(s.edge_count(Relation::connect), 1u);
}

TEST(Ingest, MalformedRowReportsLineNumber) {
  try {
    ingest_text("member\t0\ta\nmember\tx\tb\n", "", "");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    ingest_text("member\t0\ta\n", "apply\t0\n", "");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(ingest_text("planet\t0\ta\n", "", ""), ParseError);
  EXPECT_THROW(ingest_text("member\t0\ta\n", "co_apply\t0\t0\n", ""), ParseError);
  EXPECT_THROW(ingest_text("member\t0\ta\njob\t0\tb\n", "", "0\t0\t2\n"), ParseError);
}

TEST(Ingest, DanglingEndpointIsIntegrityError) {
  EXPECT_THROW(ingest_text("member\t0\ta\njob\t0\tb\n", "apply\t0\t1\n", ""), IntegrityError);
  EXPECT_THROW(ingest_text("member\t0\ta\njob\t0\tb\n", "", "3\t0\t1\n"), IntegrityError);
  EXPECT_THROW(ingest_text("member\t0\ta\nmember\t2\tb\n", "", ""), IntegrityError);
  EXPECT_THROW(ingest_text("member\t0\ta\nmember\t0\tb\n", "", ""), IntegrityError);
  EXPECT_THROW(ingest_text("member\t0\ta\njob\t0\tb\n", "", "0\t0\t1\n0\t0\t0\n"), IntegrityError);
}

TEST(Ingest, EscapedTextRoundTrips) {
  const std::string raw = "line one\nline\ttwo \\ end";
  EXPECT_EQ(unescape_field(escape_field(raw), "f", 1), raw);
  const WhinStore s = ingest_text("member\t0\t" + escape_field(raw) + "\n", "", "");
  EXPECT_EQ(s.text(member(0)), raw);
  EXPECT_THROW(unescape_field("bad\\q", "f", 3), ParseError);
}

TEST(Neighbors, KindMismatchIsContractError) {
  const WhinStore s = small_store();
  EXPECT_THROW(s.neighbors(job(0), Relation::apply), ContractError);
  EXPECT_THROW(s.neighbors(member(7), Relation::apply), ContractError);
  EXPECT_THROW(s.neighbors(member(0), RelationView{Relation::connect, true}), ContractError);
}

TEST(Neighbors, DegreeHistogramMatchesRawRecount) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint32_t members = 5 + static_cast<std::uint32_t>(rng.below(20));
    const std::uint32_t skills = 3 + static_cast<std::uint32_t>(rng.below(10));
    std::string entities, relations;
    for (std::uint32_t i = 0; i < members; ++i) entities += "member\t" + std::to_string(i) + "\tm\n";
    for (std::uint32_t i = 0; i < skills; ++i) entities += "skill\t" + std::to_string(i) + "\ts\n";
    std::map<std::uint32_t, std::set<std::uint32_t>> connect, master;
    std::map<std::uint32_t, std::set<std::uint32_t>> mastered_by;
    for (int e = 0; e < 60; ++e) {
      const auto a = static_cast<std::uint32_t>(rng.below(members));
      const auto b = static_cast<std::uint32_t>(rng.below(members));
      if (a != b) {
        relations += "connect\t" + std::to_string(a) + "\t" + std::to_string(b) + "\n";
        connect[a].insert(b);
        connect[b].insert(a);
      }
      const auto s = static_cast<std::uint32_t>(rng.below(skills));
      relations += "master\t" + std::to_string(a) + "\t" + std::to_string(s) + "\n";
      master[a].insert(s);
      mastered_by[s].insert(a);
    }
    const WhinStore store = ingest_text(entities, relations, "");
    for (std::uint32_t m = 0; m < members; ++m) {
      ASSERT_EQ(store.neighbors(member(m), Relation::connect).size(), connect[m].size());
      ASSERT_EQ(store.neighbors(member(m), Relation::master).size(), master[m].size());
      const auto list = store.neighbors(member(m), Relation::master);
      ASSERT_TRUE(std::is_sorted(list.begin(), list.end()));
    }
    for (std::uint32_t s = 0; s < skills; ++s) {
      ASSERT_EQ(store.neighbors(skill(s), RelationView{Relation::master, true}).size(),
                mastered_by[s].size());
    }
  }
}

TEST(Metapaths, SharedJobGivesOneCoApplyEdge) {
  const WhinStore s = materialize_metapaths(small_store(), 50, 1);
  const auto edges = s.edges(Relation::co_apply);
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0], std::make_pair(0u, 1u));
}

TEST(Metapaths, SharedApplicantGivesJobTriangle) {
  const WhinStore base = ingest_text("member\t0\ta\njob\t0\tx\njob\t1\ty\njob\t2\tz\n",
                                     "apply\t0\t0\napply\t0\t1\napply\t0\t2\n", "");
  const WhinStore s = materialize_metapaths(base, kUnlimitedCap, 1);
  const std::vector<std::pair<std::uint32_t, std::uint32_t>> expected = {{0, 1}, {0, 2}, {1, 2}};
  EXPECT_EQ(s.edges(Relation::co_applied), expected);
  EXPECT_TRUE(s.edges(Relation::co_apply).empty());
}

TEST(Metapaths, ZeroCapIsConfigError) {
  EXPECT_THROW(materialize_metapaths(small_store(), 0, 1), ConfigError);
}

TEST(Metapaths, UncappedEqualsBruteForceIntersection) {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> applies;
    const WhinStore base = random_store(rng, 30, 10, 0.12, &applies);
    const WhinStore s = materialize_metapaths(base, kUnlimitedCap, 7);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> flipped;
    for (auto [m, j] : applies) flipped.emplace_back(j, m);
    const auto co_apply = s.edges(Relation::co_apply);
    const auto co_applied = s.edges(Relation::co_applied);
    EXPECT_EQ(testing::EdgeSet(co_apply.begin(), co_apply.end()),
              testing::shared_neighbor_oracle(applies, 30));
    EXPECT_EQ(testing::EdgeSet(co_applied.begin(), co_applied.end()),
              testing::shared_neighbor_oracle(flipped, 10));
  }
}

TEST(Metapaths, CapBoundsDegreeAndEdgesAreWitnessed) {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const WhinStore base = random_store(rng, 40, 6, 0.5);
    const WhinStore s = materialize_metapaths(base, 4, trial);
    for (std::uint32_t m = 0; m < 40; ++m) {
      const auto nb = s.neighbors(member(m), Relation::co_apply);
      ASSERT_LE(nb.size(), 4u);
      for (std::uint32_t other : nb) {
        ASSERT_NE(other, m);
        const auto a = base.neighbors(member(m), Relation::apply);
        const auto b = base.neighbors(member(other), Relation::apply);
        const bool witnessed = std::any_of(a.begin(), a.end(), [&](std::uint32_t j) {
          return std::binary_search(b.begin(), b.end(), j);
        });
        ASSERT_TRUE(witnessed);
      }
    }
    EXPECT_EQ(materialize_metapaths(base, 4, trial), s);
  }
}

TEST(Store, SymmetricRelationsAreSymmetric) {
  Rng rng(24);
  const WhinStore s = materialize_metapaths(random_store(rng, 25, 8, 0.2), 50, 3);
  for (Relation r : {Relation::connect, Relation::co_apply, Relation::co_applied}) {
    const EntityKind kind = info(r).source;
    for (std::uint32_t a = 0; a < s.count(kind); ++a) {
      for (std::uint32_t b : s.neighbors({kind, a}, r)) {
        const auto back = s.neighbors({kind, b}, r);
        ASSERT_TRUE(std::binary_search(back.begin(), back.end(), a));
      }
    }
  }
}

TEST(Store, SerializeRoundTripIsIdentical) {
  Rng rng(25);
  WhinStore s = materialize_metapaths(random_store(rng, 20, 7, 0.3), 5, 9);
  const auto dir = std::filesystem::temp_directory_path() / "whinpjf_store_roundtrip";
  std::filesystem::remove_all(dir);
  save_store(s, dir);
  EXPECT_EQ(load_store(dir), s);

  const auto tsv = std::filesystem::temp_directory_path() / "whinpjf_store_tsv";
  std::filesystem::remove_all(tsv);
  write_tsv(s, tsv);
  const WhinStore again = read_tsv_dir(tsv);
  EXPECT_EQ(materialize_metapaths(again, 5, 9), s);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(tsv);
}

TEST(Store, TruncatedEdgeFileIsFormatError) {
  const auto dir = std::filesystem::temp_directory_path() / "whinpjf_store_truncated";
  std::filesystem::remove_all(dir);
  save_store(materialize_metapaths(small_store(), 50, 1), dir);
  std::filesystem::resize_file(dir / "edges_apply.bin", 14);
  EXPECT_THROW(load_store(dir), FormatError);
  std::filesystem::remove_all(dir);
}

TEST(Store, WithoutLinksDropsOnlyListedEdges) {
  const WhinStore s = ingest_text("member\t0\ta\nmember\t1\tb\njob\t0\tc\n",
                                  "apply\t0\t0\napply\t1\t0\nconnect\t0\t1\n", "");
  const LinkTriple drop[] = {{1, Relation::connect, 0}, {0, Relation::apply, 0}};
  const WhinStore t = without_links(s, drop);
  EXPECT_EQ(t.edge_count(Relation::connect), 0u);
  EXPECT_EQ(t.edge_count(Relation::apply), 1u);
  EXPECT_TRUE(t.has_edge(Relation::apply, 1, 0));
}

TEST(Store, GlobalNumberingRoundTrips) {
  Rng rng(26);
  const WhinStore s = random_store(rng, 5, 4, 0.5);
  for (std::uint32_t g = 0; g < s.node_count(); ++g) EXPECT_EQ(s.global_id(s.entity(g)), g);
  EXPECT_THROW(s.entity(s.node_count()), ContractError);
}

}  // namespace
}  // namespace whinpjf::graph
