#include <benchmark/benchmark.h>

#include <vector>

#include "whinpjf/autodiff/tape.hpp"
#include "whinpjf/csagnn/model.hpp"
#include "whinpjf/eval/metrics.hpp"
#include "whinpjf/pretrain/rgcn.hpp"
#include "whinpjf/sampling/sampler.hpp"
#include "whinpjf/synth/generator.hpp"

namespace {

using namespace whinpjf;
using ad::Matrix;

Matrix<float> random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix<float> m(r, c);
  for (float& v : m.values()) v = static_cast<float>(rng.uniform(-1, 1));
  return m;
}

const synth::Dataset& tech() {
  static const auto data = [] {
    auto d = synth::generate(synth::preset("tech-100x"));
    d.store = graph::materialize_metapaths(d.store, 50, 0);
    return d;
  }();
  return data;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ad::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128);

void BM_TapeMatmulBackward(benchmark::State& state) {
  Rng rng(2);
  const auto a = random_matrix(256, 32, rng), w = random_matrix(32, 32, rng);
  for (auto _ : state) {
    ad::Tape<float> tape;
    const auto x = tape.constant(a);
    const auto p = tape.leaf(w, true);
    tape.backward(tape.sum_all(tape.relu(tape.matmul(x, p))));
    benchmark::DoNotOptimize(tape.grad(p));
  }
}
BENCHMARK(BM_TapeMatmulBackward);

void BM_SampleSubgraph(benchmark::State& state) {
  const auto& store = tech().store;
  sampling::SamplerConfig cfg;
  std::vector<graph::EntityRef> seeds;
  for (std::uint32_t i = 0; i < 32; ++i) seeds.push_back({graph::EntityKind::member, i * 7});
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sampling::sample_subgraph(store, seeds, cfg, rng));
}
BENCHMARK(BM_SampleSubgraph);

void BM_RgcnLayer(benchmark::State& state) {
  const auto& store = tech().store;
  sampling::SamplerConfig cfg;
  std::vector<graph::EntityRef> seeds;
  for (std::uint32_t i = 0; i < 32; ++i) seeds.push_back({graph::EntityKind::member, i * 7});
  Rng rng(4);
  const auto batch = sampling::sample_subgraph(store, seeds, cfg, rng);
  const auto plans = pretrain::build_plans<float>(batch);
  const auto layout = pretrain::RgcnLayout::make(32, 1);
  const auto params = pretrain::init_params(32, 1, rng);
  const auto z = random_matrix(batch.nodes.size(), 32, rng);
  for (auto _ : state) {
    ad::Tape<float> tape;
    const ad::BoundParameters<float> bound(tape, params);
    benchmark::DoNotOptimize(tape.value(pretrain::rgcn_layer(tape, tape.constant(z), plans, bound, layout, 0, true)));
  }
  state.counters["nodes"] = static_cast<double>(batch.nodes.size());
}
BENCHMARK(BM_RgcnLayer);

void BM_Attention(benchmark::State& state) {
  Rng rng(5);
  const auto l = csagnn::CsagnnLayout::make(32, 1, 2, csagnn::Variant::full);
  const auto p = csagnn::init_params(l, rng);
  const auto tokens = random_matrix(64, 32, rng), queries = random_matrix(10, 32, rng);
  for (auto _ : state) benchmark::DoNotOptimize(csagnn::attention_weights(tokens, queries, p, l));
}
BENCHMARK(BM_Attention);

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = static_cast<std::uint8_t>(rng.below(2));
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::auc(scores, labels));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
