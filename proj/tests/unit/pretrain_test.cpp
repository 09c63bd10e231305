#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "whinpjf/common/error.hpp"
#include "whinpjf/graph/io.hpp"
#include "whinpjf/model/checkpoint.hpp"
#include "whinpjf/pretrain/rgcn.hpp"
#include "whinpjf/common/log.hpp"
#include "whinpjf/synth/generator.hpp"

namespace whinpjf::pretrain {
namespace {

using graph::EntityKind;
using graph::Relation;
using graph::StoreBuilder;
using graph::WhinStore;

ad::ParameterStore<double> zero_params(std::size_t dim, std::size_t layers) {
  Rng rng(1);
  auto p = init_params(dim, layers, rng).cast<double>();
  for (std::size_t h = 0; h < p.size(); ++h) p.value(h).fill(0.0);
  return p;
}

Matrix<double> random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix<double> m(r, c);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

/// Runs one layer through the tape in double precision.
Matrix<double> run_layer(const sampling::SubgraphBatch& batch, const Matrix<double>& z,
                         const ad::ParameterStore<double>& params, const RgcnLayout& layout,
                         bool relu = true) {
  ad::Tape<double> tape;
  const ad::BoundParameters<double> bound(tape, params);
  const auto plans = build_plans<double>(batch);
  return tape.value(rgcn_layer(tape, tape.constant(z), plans, bound, layout, 0, relu));
}

/// Random store with 10 entities over members, jobs and skills and the
/// relations connect, apply and master.
WhinStore random_ten_node_store(Rng& rng) {
  StoreBuilder b;
  for (std::uint32_t i = 0; i < 5; ++i) b.add_entity(EntityKind::member, i, "m");
  for (std::uint32_t i = 0; i < 3; ++i) b.add_entity(EntityKind::job, i, "j");
  for (std::uint32_t i = 0; i < 2; ++i) b.add_entity(EntityKind::skill, i, "s");
  for (std::uint32_t a = 0; a < 5; ++a) {
    for (std::uint32_t c = a + 1; c < 5; ++c) {
      if (rng.bernoulli(0.4)) b.add_edge(Relation::connect, a, c);
    }
    for (std::uint32_t j = 0; j < 3; ++j) {
      if (rng.bernoulli(0.4)) b.add_edge(Relation::apply, a, j);
    }
    for (std::uint32_t s = 0; s < 2; ++s) {
      if (rng.bernoulli(0.5)) b.add_edge(Relation::master, a, s);
    }
  }
  return b.build();
}

TEST(RgcnLayer, IsolatedNodeIsReluOfSelfLoop) {
  const WhinStore s = graph::ingest_text("member\t0\ta\n", "", "");
  const auto layout = RgcnLayout::make(3, 1);
  auto params = zero_params(3, 1);
  params.value(layout.self[0]) = Matrix<double>::identity(3);
  const auto out = run_layer(sampling::whole_graph(s), Matrix<double>::from_rows({{1, -1, 0.5}}), params, layout);
  EXPECT_EQ(out, Matrix<double>::from_rows({{1, 0, 0.5}}));
}

TEST(RgcnLayer, SingleNeighborWithIdentityWeights) {
  const WhinStore s = graph::ingest_text("member\t0\ta\nmember\t1\tb\n", "connect\t0\t1\n", "");
  const auto layout = RgcnLayout::make(2, 1);
  auto params = zero_params(2, 1);
  params.value(layout.self[0]) = Matrix<double>::identity(2);
  params.value(layout.view[0][graph::view_index({Relation::connect, false})]) = Matrix<double>::identity(2);
  const auto z = Matrix<double>::from_rows({{1, -3}, {0.5, 2}});
  const auto out = run_layer(sampling::whole_graph(s), z, params, layout);
  EXPECT_EQ(out, Matrix<double>::from_rows({{1.5, 0}, {1.5, 0}}));
}

TEST(RgcnLayer, MatchesDenseOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const WhinStore s = random_ten_node_store(rng);
    const auto batch = sampling::whole_graph(s);
    const std::size_t d = 6;
    const auto layout = RgcnLayout::make(d, 1);
    auto params = zero_params(d, 1);
    for (std::size_t h = 0; h < params.size(); ++h) {
      params.value(h) = random_matrix(params.value(h).rows(), params.value(h).cols(), rng);
    }
    std::array<Matrix<double>, graph::kViewCount> views;
    for (std::size_t v = 0; v < graph::kViewCount; ++v) views[v] = params.value(layout.view[0][v]);
    const auto z = random_matrix(batch.nodes.size(), d, rng);
    for (bool relu : {true, false}) {
      const auto expected = testing::rgcn_layer_oracle(batch, z, params.value(layout.self[0]), views, relu);
      const auto actual = run_layer(batch, z, params, layout, relu);
      for (std::size_t i = 0; i < expected.size(); ++i) {
        ASSERT_NEAR(actual.data()[i], expected.data()[i], 1e-5);
      }
    }
  }
}

TEST(RgcnLayer, MessageIsMeanOfPerNeighborMessages) {
  // m0 connected to m1, m2, m3: the connect message is the average of the
  // three transformed neighbor states.
  const WhinStore s = graph::ingest_text("member\t0\ta\nmember\t1\tb\nmember\t2\tc\nmember\t3\td\n",
                                         "connect\t0\t1\nconnect\t0\t2\nconnect\t0\t3\n", "");
  Rng rng(32);
  const auto layout = RgcnLayout::make(3, 1);
  auto params = zero_params(3, 1);
  const auto w = random_matrix(3, 3, rng);
  params.value(layout.view[0][graph::view_index({Relation::connect, false})]) = w;
  const auto z = random_matrix(4, 3, rng);
  const auto out = run_layer(sampling::whole_graph(s), z, params, layout, false);
  const auto msgs = testing::dense_matmul(z, w);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(out(0, c), (msgs(1, c) + msgs(2, c) + msgs(3, c)) / 3.0, 1e-12);
  }
}

TEST(RgcnLayer, StateMismatchIsContractError) {
  const WhinStore s = graph::ingest_text("member\t0\ta\nmember\t1\tb\n", "", "");
  const auto layout = RgcnLayout::make(2, 1);
  EXPECT_THROW(run_layer(sampling::whole_graph(s), Matrix<double>(3, 2), zero_params(2, 1), layout),
               ContractError);
}

TEST(BuildPlans, MaskedTripleCarriesNoMessageInEitherDirection) {
  const WhinStore s = graph::ingest_text("member\t0\ta\nmember\t1\tb\njob\t0\tj\n",
                                         "connect\t0\t1\napply\t0\t0\napply\t1\t0\n", "");
  const auto batch = sampling::whole_graph(s);
  const graph::LinkTriple masked[] = {{1, Relation::connect, 0}, {0, Relation::apply, 0}};
  const auto plans = build_plans<float>(batch, masked);
  EXPECT_TRUE(plans.views[graph::view_index({Relation::connect, false})].receivers.empty());
  EXPECT_EQ(plans.views[graph::view_index({Relation::apply, false})].receivers,
            std::vector<std::uint32_t>{1});
  const auto& rev = plans.views[graph::view_index({Relation::apply, true})];
  ASSERT_EQ(rev.receivers.size(), 1u);
  EXPECT_EQ(rev.aggregation->index, std::vector<std::uint32_t>{1});
}

TEST(ScoreLink, ZeroDecoderGivesHalf) {
  const auto layout = RgcnLayout::make(4, 1);
  Rng rng(33);
  auto params = init_params(4, 1, rng);
  for (auto h : {layout.dec_w1, layout.dec_b1, layout.dec_w2, layout.dec_b2}) params.value(h).fill(0.0f);
  const std::vector<float> a = {1, 2, 3, 4}, b = {-1, 0, 5, 2};
  EXPECT_EQ(score_link(a, Relation::apply, b, params, layout), 0.5);
}

TEST(ScoreLink, OutputStrictlyInsideUnitInterval) {
  const auto layout = RgcnLayout::make(8, 1);
  Rng rng(34);
  const auto params = init_params(8, 1, rng);
  for (int i = 0; i < 100; ++i) {
    std::vector<float> a(8), b(8);
    for (auto& v : a) v = static_cast<float>(rng.uniform(-3, 3));
    for (auto& v : b) v = static_cast<float>(rng.uniform(-3, 3));
    const double p = score_link(a, Relation::master, b, params, layout);
    ASSERT_GT(p, 0.0);
    ASSERT_LT(p, 1.0);
  }
}

TEST(ScoreLink, HandSetTwoDimensionalDecoder) {
  const auto layout = RgcnLayout::make(2, 1);
  Rng rng(35);
  auto params = init_params(2, 1, rng);
  params.value(layout.relation).fill(0.0f);
  params.value(layout.relation)(graph::index_of(Relation::apply), 0) = 0.5f;
  params.value(layout.relation)(graph::index_of(Relation::apply), 1) = -1.0f;
  // x = [zs | M | zd] (6), W1 6x2, b1, W2 2x1, b2.
  params.value(layout.dec_w1) = Matrix<float>::from_rows(
      {{1, 0}, {0, 1}, {1, 1}, {-1, 0}, {0.5f, 0}, {0, 2}});
  params.value(layout.dec_b1) = Matrix<float>::from_rows({{0.1f, -0.2f}});
  params.value(layout.dec_w2) = Matrix<float>::from_rows({{1.5f}, {-0.5f}});
  params.value(layout.dec_b2) = Matrix<float>::from_rows({{0.25f}});
  const std::vector<float> zs = {0.2f, 0.4f}, zd = {1.0f, -0.3f};
  // hidden_0 = 0.2 + 0.5 - 1*... computed term by term:
  const double x[6] = {0.2, 0.4, 0.5, -1.0, 1.0, -0.3};
  const double w1[6][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 0}, {0.5, 0}, {0, 2}};
  double h[2] = {0.1, -0.2};
  for (int k = 0; k < 6; ++k) {
    h[0] += x[k] * w1[k][0];
    h[1] += x[k] * w1[k][1];
  }
  h[0] = std::max(h[0], 0.0);
  h[1] = std::max(h[1], 0.0);
  const double logit = 1.5 * h[0] - 0.5 * h[1] + 0.25;
  const double expected = 1.0 / (1.0 + std::exp(-logit));
  EXPECT_NEAR(score_link(zs, Relation::apply, zd, params, layout), expected, 1e-6);
}

TEST(PretrainGradient, TwoLayerEncoderAndLossMatchFiniteDifferences) {
  // 6-node subgraph: 3 members, 2 jobs, 1 skill.
  const WhinStore s = graph::materialize_metapaths(
      graph::ingest_text("member\t0\ta\nmember\t1\tb\nmember\t2\tc\njob\t0\tx\njob\t1\ty\nskill\t0\tz\n",
                         "connect\t0\t1\nconnect\t1\t2\napply\t0\t0\napply\t1\t0\napply\t2\t1\n"
                         "master\t0\t0\nmaster\t2\t0\nrequire\t0\t0\nrequire\t1\t0\n",
                         ""),
      graph::kUnlimitedCap, 1);
  const auto batch = sampling::whole_graph(s);
  ASSERT_EQ(batch.nodes.size(), 6u);
  const std::size_t dim = 4;
  const auto layout = RgcnLayout::make(dim, 2);
  const std::vector<LocalTriple> triples = {
      {0, Relation::connect, 1}, {2, Relation::apply, 4}, {1, Relation::co_apply, 0},
      {0, Relation::apply, 4},   {2, Relation::connect, 0}, {3, Relation::require, 5}};
  Matrix<double> labels(6, 1);
  labels(0, 0) = labels(1, 0) = labels(2, 0) = labels(5, 0) = 1;
  const graph::LinkTriple masked[] = {{0, Relation::connect, 1}};
  const auto plans = build_plans<double>(batch, masked);

  Rng rng(36);
  int checked = 0;
  for (int attempt = 0; attempt < 50 && checked < 5; ++attempt) {
    Rng init = rng.substream("init", attempt);
    const auto params = init_params(dim, 2, init).cast<double>();
    std::vector<Matrix<double>> inputs;
    for (std::size_t h = 0; h < params.size(); ++h) inputs.push_back(params.value(h));
    inputs.push_back(random_matrix(6, dim, rng));  // z0 as an input too
    const auto result = testing::gradient_check(inputs, [&](ad::Tape<double>& t, const std::vector<Var>& v) {
      const ad::BoundParameters<double> bound(std::vector<Var>(v.begin(), v.end() - 1));
      const Var z = encode(t, v.back(), plans, bound, layout);
      return t.bce_with_logits(link_logits(t, z, triples, bound, layout), labels);
    });
    if (result.min_relu_margin < 1e-2) continue;  // too close to a kink for finite differences
    ASSERT_LT(result.max_rel_error, 1e-4) << result.worst;
    ++checked;
  }
  EXPECT_EQ(checked, 5);
}

TEST(PretrainLoss, HandComputedBatchOfFour) {
  const double y[] = {0.8, 0.3, 0.6, 0.1};
  const double label[] = {1, 0, 0, 1};
  Matrix<double> logits(4, 1), labels(4, 1);
  double expected = 0;
  for (int i = 0; i < 4; ++i) {
    logits(i, 0) = std::log(y[i] / (1 - y[i]));
    labels(i, 0) = label[i];
    expected -= label[i] * std::log(y[i]) + (1 - label[i]) * std::log(1 - y[i]);
  }
  ad::Tape<double> tape;
  EXPECT_NEAR(tape.value(tape.bce_with_logits(tape.constant(logits), labels))(0, 0), expected / 4, 1e-12);
}

TEST(Checkpoint, MatrixRoundTripAndTruncation) {
  const auto path = std::filesystem::temp_directory_path() / "whinpjf_matrix.bin";
  const auto m = Matrix<float>::from_rows({{1.5f, -2.25f, 3e-8f}, {0.0f, 7.0f, -1e6f}});
  model::save_matrix(path, m);
  EXPECT_EQ(model::load_matrix(path), m);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  EXPECT_THROW(model::load_matrix(path), FormatError);
  std::filesystem::remove(path);
  EXPECT_THROW(model::load_matrix(path), DependencyError);
}

// ---------------------------------------------------------------- training

struct SmallData {
  WhinStore store;
  text::TextTable text;
};

const SmallData& small_data() {
  static const SmallData data = [] {
    log::set_level(log::Level::warn);
    synth::GenConfig g;
    g.members = 40;
    g.jobs = 40;
    g.skills = 45;
    g.pairs = 100;
    g.connections = 120;
    g.seed = 11;
    SmallData d{graph::materialize_metapaths(synth::generate(g).store, 50, 0), {}};
    const text::HashedEmbedder embedder(8, 0);
    d.text = text::build_text_table(d.store, embedder);
    return d;
  }();
  return data;
}

PretrainConfig small_config(std::size_t epochs) {
  PretrainConfig c;
  c.dim = 8;
  c.epochs = epochs;
  c.learning_rate = 1e-2;
  c.seed = 3;
  return c;
}

TEST(TrainPretrain, ZeroEpochsIsDeterministicAndLeavesInitialWeights) {
  const auto& d = small_data();
  const auto a = train_pretrain(d.store, d.text, small_config(0));
  const auto b = train_pretrain(d.store, d.text, small_config(0));
  EXPECT_TRUE(a.history.empty());
  EXPECT_EQ(a.table, b.table);
  EXPECT_EQ(a.table, compute_embeddings(d.store, d.text, a.params, a.layout));
}

TEST(TrainPretrain, SameSeedGivesBitIdenticalRuns) {
  const auto& d = small_data();
  const auto a = train_pretrain(d.store, d.text, small_config(2));
  const auto b = train_pretrain(d.store, d.text, small_config(2));
  ASSERT_EQ(a.history.size(), 2u);
  for (std::size_t e = 0; e < 2; ++e) {
    EXPECT_EQ(a.history[e].loss, b.history[e].loss);
    EXPECT_EQ(a.history[e].heldout_auc, b.history[e].heldout_auc);
  }
  EXPECT_EQ(a.table, b.table);
  for (ParamHandle h = 0; h < a.params.size(); ++h) EXPECT_EQ(a.params.value(h), b.params.value(h));
  auto other = small_config(2);
  other.seed = 4;
  EXPECT_NE(train_pretrain(d.store, d.text, other).table, a.table);
}

TEST(TrainPretrain, LossFallsOverTheFirstEpochsAndMetricsAreInRange) {
  const auto& d = small_data();
  const auto r = train_pretrain(d.store, d.text, small_config(5));
  ASSERT_EQ(r.history.size(), 5u);
  EXPECT_LT(r.history.back().loss, r.history.front().loss);
  for (const auto& e : r.history) {
    EXPECT_TRUE(std::isfinite(e.loss));
    EXPECT_GE(e.heldout_auc, 0.0);
    EXPECT_LE(e.heldout_auc, 1.0);
  }
  EXPECT_NEAR(r.random_baseline_auc, 0.5, 0.15);
}

TEST(TrainPretrain, ExportAndCheckpointRoundTrip) {
  const auto& d = small_data();
  const auto r = train_pretrain(d.store, d.text, small_config(1));
  const auto dir = std::filesystem::temp_directory_path() / "whinpjf_pretrain_ckpt";
  std::filesystem::remove_all(dir);
  save_checkpoint(dir, r, small_config(1), d.store);
  EXPECT_EQ(load_embeddings(dir), r.table);
  const auto loaded = load_checkpoint(dir);
  EXPECT_EQ(loaded.table, r.table);
  ASSERT_EQ(loaded.params.size(), r.params.size());
  for (ParamHandle h = 0; h < r.params.size(); ++h) EXPECT_EQ(loaded.params.value(h), r.params.value(h));
  std::filesystem::remove(dir / "embedding_skill.bin");
  EXPECT_THROW(load_embeddings(dir), DependencyError);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_checkpoint(dir), DependencyError);
}

}  // namespace
}  // namespace whinpjf::pretrain
