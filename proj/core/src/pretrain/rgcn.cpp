#include "whinpjf/pretrain/rgcn.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "whinpjf/common/error.hpp"
#include "whinpjf/common/log.hpp"
#include "whinpjf/common/manifest.hpp"
#include "whinpjf/eval/metrics.hpp"
#include "whinpjf/model/checkpoint.hpp"

namespace whinpjf::pretrain {

using graph::EntityKind;
using graph::EntityRef;
using graph::LinkTriple;
using graph::Relation;
using graph::WhinStore;

void PretrainConfig::validate() const {
  sampler.validate();
  if (dim == 0) throw ConfigError("pretrain: dim must be positive");
  if (layers == 0) throw ConfigError("pretrain: layers must be positive");
  if (batch_pairs == 0) throw ConfigError("pretrain: batch size must be positive");
  if (!(learning_rate > 0)) throw ConfigError("pretrain: learning rate must be positive");
  if (!(target_fraction > 0 && target_fraction <= 1)) {
    throw ConfigError("pretrain: target fraction must be in (0, 1]");
  }
  if (max_targets == 0) throw ConfigError("pretrain: max targets must be positive");
  if (!(holdout_fraction >= 0 && holdout_fraction < 1)) {
    throw ConfigError("pretrain: holdout fraction must be in [0, 1)");
  }
}

// -------------------------------------------------------------------- layout

RgcnLayout RgcnLayout::make(std::size_t dim, std::size_t layers) {
  RgcnLayout l;
  l.dim = dim;
  l.layers = layers;
  ParamHandle next = 0;
  for (std::size_t i = 0; i < layers; ++i) {
    l.self.push_back(next++);
    std::array<ParamHandle, kViewCount> v{};
    for (auto& h : v) h = next++;
    l.view.push_back(v);
  }
  l.relation = next++;
  l.dec_w1 = next++;
  l.dec_b1 = next++;
  l.dec_w2 = next++;
  l.dec_b2 = next++;
  return l;
}

namespace {

struct ParamSpec {
  std::string name;
  std::size_t rows;
  std::size_t cols;
};

std::vector<ParamSpec> param_specs(std::size_t dim, std::size_t layers) {
  std::vector<ParamSpec> specs;
  for (std::size_t l = 0; l < layers; ++l) {
    specs.push_back({fmt::format("l{}.self", l), dim, dim});
    for (const auto& view : graph::all_views()) {
      specs.push_back({fmt::format("l{}.{}", l, graph::view_name(view)), dim, dim});
    }
  }
  specs.push_back({"relation", graph::kRelationCount, dim});
  specs.push_back({"decoder.w1", 3 * dim, dim});
  specs.push_back({"decoder.b1", 1, dim});
  specs.push_back({"decoder.w2", dim, 1});
  specs.push_back({"decoder.b2", 1, 1});
  return specs;
}

}  // namespace

template <typename T>
void RgcnLayout::check(const ad::ParameterStore<T>& store) const {
  const auto specs = param_specs(dim, layers);
  if (store.size() != specs.size()) {
    throw FormatError(fmt::format("encoder expects {} parameters, found {}", specs.size(), store.size()));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& v = store.value(i);
    if (store.name(i) != specs[i].name || v.rows() != specs[i].rows || v.cols() != specs[i].cols) {
      throw FormatError(fmt::format("encoder parameter {} is {} {}, expected {} {}x{}", i, store.name(i),
                                    ad::shape_string(v), specs[i].name, specs[i].rows, specs[i].cols));
    }
  }
}

template void RgcnLayout::check(const ad::ParameterStore<float>&) const;
template void RgcnLayout::check(const ad::ParameterStore<double>&) const;

ad::ParameterStore<float> init_params(std::size_t dim, std::size_t layers, Rng& rng) {
  ad::ParameterStore<float> store;
  for (const auto& spec : param_specs(dim, layers)) {
    const bool bias = spec.name == "decoder.b1" || spec.name == "decoder.b2";
    store.add(spec.name, bias ? Matrix<float>(spec.rows, spec.cols)
                              : ad::glorot_uniform(spec.rows, spec.cols, rng));
  }
  return store;
}

// --------------------------------------------------------------------- plans

template <typename T>
MessagePlans<T> build_plans(const sampling::SubgraphBatch& batch,
                            std::span<const LinkTriple> masked) {
  const auto views = graph::all_views();
  std::array<std::unordered_set<std::uint64_t>, kViewCount> skip;
  auto key = [](std::uint32_t a, std::uint32_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; };
  for (const LinkTriple& t : masked) {
    const auto& ri = graph::info(t.relation);
    const auto ls = batch.local({ri.source, t.source});
    const auto ld = batch.local({ri.destination, t.destination});
    if (!ls || !ld) continue;
    const std::size_t fwd = graph::view_index({t.relation, false});
    skip[fwd].insert(key(*ls, *ld));
    if (ri.symmetric) {
      skip[fwd].insert(key(*ld, *ls));
    } else {
      skip[graph::view_index({t.relation, true})].insert(key(*ld, *ls));
    }
  }

  MessagePlans<T> plans;
  plans.node_count = batch.nodes.size();
  for (std::size_t vi = 0; vi < views.size(); ++vi) {
    auto agg = std::make_shared<ad::RowAggregation<T>>();
    auto& receivers = plans.views[vi].receivers;
    const auto& edges = batch.edges[vi];
    for (std::size_t i = 0; i < edges.size();) {
      const std::uint32_t src = edges[i].first;
      const std::size_t begin = agg->index.size();
      for (; i < edges.size() && edges[i].first == src; ++i) {
        if (!skip[vi].empty() && skip[vi].count(key(src, edges[i].second))) continue;
        agg->index.push_back(edges[i].second);
      }
      const std::size_t degree = agg->index.size() - begin;
      if (degree == 0) continue;
      agg->weight.insert(agg->weight.end(), degree, T(1) / static_cast<T>(degree));
      agg->offsets.push_back(static_cast<std::uint32_t>(agg->index.size()));
      receivers.push_back(src);
    }
    plans.views[vi].aggregation = std::move(agg);
  }
  return plans;
}

// ------------------------------------------------------------------- forward

template <typename T>
Var rgcn_layer(ad::Tape<T>& tape, Var z, const MessagePlans<T>& plans,
               const ad::BoundParameters<T>& params, const RgcnLayout& layout, std::size_t layer,
               bool relu) {
  if (tape.value(z).rows() != plans.node_count) {
    throw ContractError(fmt::format("rgcn_layer: {} state rows for {} batch nodes",
                                    tape.value(z).rows(), plans.node_count));
  }
  if (layer >= layout.layers) throw ContractError("rgcn_layer: layer index out of range");
  Var out = tape.matmul(z, params[layout.self[layer]]);
  std::vector<Var> messages;
  std::vector<std::uint32_t> receivers;
  for (std::size_t vi = 0; vi < kViewCount; ++vi) {
    const auto& plan = plans.views[vi];
    if (plan.receivers.empty()) continue;
    const Var mean = tape.aggregate(z, plan.aggregation);
    messages.push_back(tape.matmul(mean, params[layout.view[layer][vi]]));
    receivers.insert(receivers.end(), plan.receivers.begin(), plan.receivers.end());
  }
  if (!messages.empty()) {
    const Var stacked = messages.size() == 1 ? messages[0] : tape.concat_rows(messages);
    out = tape.add(out, tape.scatter_add_rows(stacked, std::move(receivers), plans.node_count));
  }
  return relu ? tape.relu(out) : out;
}

template <typename T>
Var encode(ad::Tape<T>& tape, Var z0, const MessagePlans<T>& plans,
           const ad::BoundParameters<T>& params, const RgcnLayout& layout) {
  Var z = z0;
  for (std::size_t l = 0; l < layout.layers; ++l) {
    z = rgcn_layer(tape, z, plans, params, layout, l, l + 1 < layout.layers);
  }
  return z;
}

template <typename T>
Var link_logits(ad::Tape<T>& tape, Var z, std::span<const LocalTriple> triples,
                const ad::BoundParameters<T>& params, const RgcnLayout& layout) {
  if (triples.empty()) throw EmptyInputError("link_logits: no triples");
  std::vector<std::uint32_t> src, rel, dst;
  for (const auto& t : triples) {
    src.push_back(t.source);
    rel.push_back(static_cast<std::uint32_t>(graph::index_of(t.relation)));
    dst.push_back(t.destination);
  }
  const Var parts[] = {tape.gather_rows(z, std::move(src)),
                       tape.gather_rows(params[layout.relation], std::move(rel)),
                       tape.gather_rows(z, std::move(dst))};
  const Var x = tape.concat_cols(parts);
  const Var h = tape.relu(tape.add_bias(tape.matmul(x, params[layout.dec_w1]), params[layout.dec_b1]));
  return tape.add_bias(tape.matmul(h, params[layout.dec_w2]), params[layout.dec_b2]);
}

#define WHINPJF_INSTANTIATE(T)                                                                     \
  template MessagePlans<T> build_plans<T>(const sampling::SubgraphBatch&,                          \
                                          std::span<const LinkTriple>);                            \
  template Var rgcn_layer<T>(ad::Tape<T>&, Var, const MessagePlans<T>&,                            \
                             const ad::BoundParameters<T>&, const RgcnLayout&, std::size_t, bool); \
  template Var encode<T>(ad::Tape<T>&, Var, const MessagePlans<T>&, const ad::BoundParameters<T>&, \
                         const RgcnLayout&);                                                       \
  template Var link_logits<T>(ad::Tape<T>&, Var, std::span<const LocalTriple>,                     \
                              const ad::BoundParameters<T>&, const RgcnLayout&);
WHINPJF_INSTANTIATE(float)
WHINPJF_INSTANTIATE(double)
#undef WHINPJF_INSTANTIATE

double score_link(std::span<const float> z_s, Relation r, std::span<const float> z_d,
                  const ad::ParameterStore<float>& params, const RgcnLayout& layout) {
  if (z_s.size() != layout.dim || z_d.size() != layout.dim) {
    throw DimensionError("score_link: state vectors must have the embedding dim");
  }
  ad::Tape<float> tape;
  Matrix<float> states(2, layout.dim);
  std::copy(z_s.begin(), z_s.end(), states.row(0).begin());
  std::copy(z_d.begin(), z_d.end(), states.row(1).begin());
  const ad::BoundParameters<float> bound(tape, params);
  const LocalTriple t{0, r, 1};
  const Var logit = link_logits(tape, tape.constant(std::move(states)), std::span(&t, 1), bound, layout);
  const double x = tape.value(logit)(0, 0);
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// ------------------------------------------------------------------ tables

Matrix<float> initial_features(const WhinStore& store, const text::TextTable& text) {
  Matrix<float> z0(store.node_count(), text.dim);
  for (EntityKind kind : graph::kAllEntityKinds) {
    const Matrix<float>& m = text.mean[graph::index_of(kind)];
    if (m.rows() != store.count(kind)) {
      throw ContractError("text table does not match store entity counts");
    }
    if (m.rows() == 0) continue;
    std::copy(m.values().begin(), m.values().end(), z0.row(store.kind_offset(kind)).begin());
  }
  return z0;
}

EmbeddingTable split_by_kind(const WhinStore& store, const Matrix<float>& states) {
  EmbeddingTable table;
  table.dim = states.cols();
  for (EntityKind kind : graph::kAllEntityKinds) {
    const std::uint32_t n = store.count(kind);
    Matrix<float> m(n, states.cols());
    const std::size_t offset = store.kind_offset(kind);
    for (std::uint32_t i = 0; i < n; ++i) {
      std::copy(states.row(offset + i).begin(), states.row(offset + i).end(), m.row(i).begin());
    }
    table.rows[graph::index_of(kind)] = std::move(m);
  }
  return table;
}

namespace {

Matrix<float> forward_states(const WhinStore& store, const Matrix<float>& z0,
                             const ad::ParameterStore<float>& params, const RgcnLayout& layout) {
  const sampling::SubgraphBatch batch = sampling::whole_graph(store);
  const MessagePlans<float> plans = build_plans<float>(batch);
  ad::Tape<float> tape;
  const ad::BoundParameters<float> bound(tape, params);
  const Var z = encode(tape, tape.constant(z0), plans, bound, layout);
  return tape.value(z);
}

std::uint8_t as_label(bool b) { return b ? 1 : 0; }

}  // namespace

EmbeddingTable compute_embeddings(const WhinStore& store, const text::TextTable& text,
                                  const ad::ParameterStore<float>& params, const RgcnLayout& layout) {
  layout.check(params);
  if (text.dim != layout.dim) throw DimensionError("text dim differs from encoder dim");
  return split_by_kind(store, forward_states(store, initial_features(store, text), params, layout));
}

// ----------------------------------------------------------------- held out

HeldOutLinks hold_out_links(const WhinStore& store, double fraction, Rng& rng) {
  HeldOutLinks out;
  for (Relation r : graph::natural_relations()) {
    auto edges = store.edges(r);
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(edges.size())));
    if (k == 0) continue;
    Rng local = rng.substream(graph::to_string(r));
    local.shuffle(edges);
    edges.resize(k);
    std::sort(edges.begin(), edges.end());
    for (const auto& [s, d] : edges) out.positives.push_back({s, r, d});
  }
  if (!out.positives.empty()) {
    Rng neg = rng.substream("negatives");
    out.negatives = sampling::sample_negatives(store, out.positives, 1, neg);
  }
  return out;
}

double heldout_auc(const WhinStore& store, const Matrix<float>& states, const HeldOutLinks& links,
                   const ad::ParameterStore<float>& params, const RgcnLayout& layout) {
  if (links.positives.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<LocalTriple> triples;
  std::vector<std::uint8_t> labels;
  auto add = [&](const LinkTriple& t, bool label) {
    const auto& ri = graph::info(t.relation);
    triples.push_back({store.global_id({ri.source, t.source}), t.relation,
                       store.global_id({ri.destination, t.destination})});
    labels.push_back(as_label(label));
  };
  for (const auto& t : links.positives) add(t, true);
  for (const auto& t : links.negatives) add(t, false);
  ad::Tape<float> tape;
  const ad::BoundParameters<float> bound(tape, params);
  const Var logits = link_logits(tape, tape.constant(states), triples, bound, layout);
  const auto& lv = tape.value(logits);
  std::vector<double> scores(lv.values().begin(), lv.values().end());
  return eval::auc(scores, labels);
}

// ------------------------------------------------------------------ training

PretrainResult train_pretrain(const WhinStore& store, const text::TextTable& text,
                              const PretrainConfig& cfg) {
  cfg.validate();
  if (!store.metapaths().materialized) {
    throw ContractError("train_pretrain: metapaths must be materialized first");
  }
  if (text.dim != cfg.dim) {
    throw ConfigError(fmt::format("text embedding dim {} differs from model dim {}", text.dim, cfg.dim));
  }
  const Rng root(cfg.seed);
  PretrainResult result;
  result.layout = RgcnLayout::make(cfg.dim, cfg.layers);
  {
    Rng init = root.substream("init");
    result.params = init_params(cfg.dim, cfg.layers, init);
  }
  const RgcnLayout& layout = result.layout;

  // Training graph: the store minus held-out links, metapaths rebuilt.
  HeldOutLinks heldout;
  WhinStore train_store = store;
  if (cfg.holdout_fraction > 0) {
    Rng split = root.substream("holdout");
    heldout = hold_out_links(store, cfg.holdout_fraction, split);
    train_store = graph::materialize_metapaths(graph::without_links(store, heldout.positives),
                                               store.metapaths().cap, store.metapaths().seed);
  }
  const Matrix<float> z0 = initial_features(store, text);

  if (!heldout.positives.empty()) {
    Rng baseline = root.substream("baseline");
    Matrix<float> random_states(store.node_count(), cfg.dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
    for (float& v : random_states.values()) v = static_cast<float>(baseline.normal() * scale);
    const auto untrained = init_params(cfg.dim, cfg.layers, baseline);
    result.random_baseline_auc = heldout_auc(store, random_states, heldout, untrained, layout);
  }

  // Seeds come from candidate pairs; without pairs every member seeds once.
  const auto pairs = store.pairs();
  const std::size_t units = pairs.empty() ? store.count(EntityKind::member) : pairs.size();
  if (units == 0) throw ContractError("train_pretrain: store has no members");

  ad::Adam<float> adam({cfg.learning_rate, 0.9, 0.999, 1e-8}, result.params);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::uint32_t> order(units);
    std::iota(order.begin(), order.end(), 0u);
    Rng shuffle = root.substream("epoch", epoch);
    shuffle.shuffle(order);

    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < units; begin += cfg.batch_pairs, ++step) {
      std::vector<EntityRef> seeds;
      for (std::size_t i = begin; i < std::min(units, begin + cfg.batch_pairs); ++i) {
        if (pairs.empty()) {
          seeds.push_back(graph::member(order[i]));
        } else {
          seeds.push_back(graph::member(pairs[order[i]].member));
          seeds.push_back(graph::job(pairs[order[i]].job));
        }
      }
      Rng rng = root.substream("batch", step);
      sampling::SubgraphBatch batch = sampling::sample_subgraph(train_store, seeds, cfg.sampler, rng);
      if (batch.positives.empty()) continue;

      std::vector<LinkTriple> targets = batch.positives;
      rng.shuffle(targets);
      const auto wanted = static_cast<std::size_t>(
          std::ceil(cfg.target_fraction * static_cast<double>(targets.size())));
      targets.resize(std::min({targets.size(), std::max<std::size_t>(1, wanted), cfg.max_targets}));
      const auto negatives = sampling::sample_negatives(train_store, targets, cfg.sampler.negative_ratio, rng);

      std::vector<EntityRef> extra;
      for (const auto& n : negatives) extra.push_back({graph::info(n.relation).destination, n.destination});
      sampling::extend_subgraph(train_store, batch, extra, cfg.sampler, rng);

      const MessagePlans<float> plans = build_plans<float>(batch, targets);
      std::vector<LocalTriple> triples;
      Matrix<float> labels(targets.size() + negatives.size(), 1);
      auto add = [&](const LinkTriple& t, float label) {
        const auto& ri = graph::info(t.relation);
        labels(triples.size(), 0) = label;
        triples.push_back({batch.require_local({ri.source, t.source}), t.relation,
                           batch.require_local({ri.destination, t.destination})});
      };
      for (const auto& t : targets) add(t, 1.0f);
      for (const auto& t : negatives) add(t, 0.0f);

      Matrix<float> zb(batch.nodes.size(), cfg.dim);
      for (std::size_t i = 0; i < batch.nodes.size(); ++i) {
        const auto src = z0.row(train_store.global_id(batch.nodes[i]));
        std::copy(src.begin(), src.end(), zb.row(i).begin());
      }

      ad::Tape<float> tape;
      const ad::BoundParameters<float> bound(tape, result.params);
      const Var z = encode(tape, tape.constant(std::move(zb)), plans, bound, layout);
      const Var loss = tape.bce_with_logits(link_logits(tape, z, triples, bound, layout), labels);
      const double lv = tape.value(loss)(0, 0);
      if (!std::isfinite(lv)) {
        throw NumericError(fmt::format("pretraining diverged: loss {} at epoch {} step {}", lv, epoch, step));
      }
      tape.backward(loss);
      adam.step(result.params, bound.gradients(tape));
      if (!result.params.all_finite()) {
        throw NumericError(fmt::format("pretraining produced non-finite weights at epoch {} step {}", epoch, step));
      }
      loss_sum += lv;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.loss = batches ? loss_sum / static_cast<double>(batches) : std::numeric_limits<double>::quiet_NaN();
    stats.heldout_auc = std::numeric_limits<double>::quiet_NaN();
    if (!heldout.positives.empty()) {
      const Matrix<float> states = forward_states(train_store, z0, result.params, layout);
      stats.heldout_auc = heldout_auc(store, states, heldout, result.params, layout);
    }
    result.history.push_back(stats);
    log::info("pretrain_epoch", {{"epoch", stats.epoch}, {"loss", stats.loss}, {"heldout_auc", stats.heldout_auc}});
  }

  if (!heldout.positives.empty()) {
    result.heldout_auc = result.history.empty()
                             ? heldout_auc(store, forward_states(train_store, z0, result.params, layout),
                                           heldout, result.params, layout)
                             : result.history.back().heldout_auc;
  } else {
    result.heldout_auc = std::numeric_limits<double>::quiet_NaN();
  }
  result.table = split_by_kind(store, forward_states(store, z0, result.params, layout));
  return result;
}

// --------------------------------------------------------------- checkpoint

namespace {

constexpr std::uint64_t kCheckpointVersion = 1;

std::string relation_vocabulary() {
  std::string vocab;
  for (Relation r : graph::all_relations()) {
    if (!vocab.empty()) vocab += ',';
    vocab += graph::to_string(r);
  }
  return vocab;
}

std::filesystem::path embedding_path(const std::filesystem::path& dir, EntityKind kind) {
  return dir / ("embedding_" + std::string(graph::to_string(kind)) + ".bin");
}

}  // namespace

void export_embeddings(const EmbeddingTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (EntityKind kind : graph::kAllEntityKinds) {
    const Matrix<float>& m = table.kind(kind);
    if (!m.all_finite()) throw NumericError("embedding table has non-finite values");
    model::save_matrix(embedding_path(dir, kind), m);
  }
}

EmbeddingTable load_embeddings(const std::filesystem::path& dir) {
  EmbeddingTable table;
  for (EntityKind kind : graph::kAllEntityKinds) {
    Matrix<float> m = model::load_matrix(embedding_path(dir, kind));
    if (kind == EntityKind::member) table.dim = m.cols();
    if (m.cols() != table.dim) throw FormatError("embedding files disagree on dim in " + dir.string());
    table.rows[graph::index_of(kind)] = std::move(m);
  }
  return table;
}

void save_checkpoint(const std::filesystem::path& dir, const PretrainResult& result,
                     const PretrainConfig& cfg, const WhinStore& store) {
  std::filesystem::create_directories(dir);
  Manifest m;
  m.set("format", "whin-pretrain");
  m.set("format_version", kCheckpointVersion);
  m.set("dim", std::uint64_t{cfg.dim});
  m.set("layers", std::uint64_t{cfg.layers});
  m.set("hops", std::uint64_t{cfg.sampler.hops});
  m.set("fanout", std::uint64_t{cfg.sampler.fanout});
  m.set("negative_ratio", std::uint64_t{cfg.sampler.negative_ratio});
  m.set("epochs", std::uint64_t{cfg.epochs});
  m.set("batch_pairs", std::uint64_t{cfg.batch_pairs});
  m.set("learning_rate", cfg.learning_rate);
  m.set("target_fraction", cfg.target_fraction);
  m.set("max_targets", std::uint64_t{cfg.max_targets});
  m.set("holdout_fraction", cfg.holdout_fraction);
  m.set("seed", cfg.seed);
  m.set("relations", relation_vocabulary());
  m.set("metapath_cap", std::uint64_t{store.metapaths().cap});
  m.set("metapath_seed", store.metapaths().seed);
  for (EntityKind kind : graph::kAllEntityKinds) {
    m.set("count." + std::string(graph::to_string(kind)), std::uint64_t{store.count(kind)});
  }
  for (const auto& e : result.history) {
    m.set(fmt::format("epoch.{}.loss", e.epoch), e.loss);
    m.set(fmt::format("epoch.{}.heldout_auc", e.epoch), e.heldout_auc);
  }
  m.set("heldout_auc", result.heldout_auc);
  m.set("random_baseline_auc", result.random_baseline_auc);
  m.save(dir / "manifest.txt");
  export_embeddings(result.table, dir);
  model::save_parameters(dir, "param_", result.params);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DependencyError("missing pre-training checkpoint " + dir.string());
  const Manifest m = Manifest::load(dir / "manifest.txt");
  if (m.get("format") != "whin-pretrain") throw FormatError(dir.string() + " is not a pre-training checkpoint");
  if (m.get_u64("format_version") != kCheckpointVersion) {
    throw FormatError(dir.string() + ": unsupported checkpoint version " + m.get("format_version"));
  }
  if (m.get("relations") != relation_vocabulary()) throw FormatError(dir.string() + ": relation vocabulary mismatch");
  LoadedCheckpoint out;
  const std::size_t dim = m.get_u64("dim");
  const std::size_t layers = m.get_u64("layers");
  out.layout = RgcnLayout::make(dim, layers);
  for (const auto& spec : param_specs(dim, layers)) out.params.add(spec.name, Matrix<float>(spec.rows, spec.cols));
  model::load_parameters(dir, "param_", out.params);
  out.table = load_embeddings(dir);
  if (out.table.dim != dim) throw FormatError(dir.string() + ": embedding dim disagrees with manifest");
  for (EntityKind kind : graph::kAllEntityKinds) {
    if (out.table.kind(kind).rows() != m.get_u64("count." + std::string(graph::to_string(kind)))) {
      throw FormatError(dir.string() + ": embedding rows disagree with manifest counts");
    }
  }
  return out;
}

}  // namespace whinpjf::pretrain
