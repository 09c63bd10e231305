#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "whinpjf/autodiff/parameters.hpp"
#include "whinpjf/autodiff/tape.hpp"
#include "whinpjf/graph/store.hpp"
#include "whinpjf/sampling/sampler.hpp"
#include "whinpjf/text/embedder.hpp"

namespace whinpjf::pretrain {

using ad::Matrix;
using ad::ParamHandle;
using ad::Var;
using graph::kViewCount;

struct PretrainConfig {
  std::size_t dim = 32;
  std::size_t layers = 3;
  sampling::SamplerConfig sampler;
  std::size_t epochs = 20;
  std::size_t batch_pairs = 64;      ///< candidate pairs whose endpoints seed one batch
  double learning_rate = 1e-3;
  double target_fraction = 0.5;      ///< share of batch positives used as masked targets
  std::size_t max_targets = 2048;    ///< cap on targets per batch
  double holdout_fraction = 0.1;     ///< per natural relation; 0 disables held-out AUC
  std::uint64_t seed = 0;

  void validate() const;
};

/// Parameter handles; the order matches init_params.
struct RgcnLayout {
  std::size_t dim = 0;
  std::size_t layers = 0;
  std::vector<ParamHandle> self;                            ///< W_0 per layer
  std::vector<std::array<ParamHandle, kViewCount>> view;    ///< W_r per layer and view
  ParamHandle relation = 0;                                  ///< M, one row per relation
  ParamHandle dec_w1 = 0, dec_b1 = 0, dec_w2 = 0, dec_b2 = 0;

  static RgcnLayout make(std::size_t dim, std::size_t layers);
  /// Throws FormatError unless `store` has exactly this layout's names and shapes.
  template <typename T>
  void check(const ad::ParameterStore<T>& store) const;
};

/// Glorot-initialized encoder weights and relation vectors, decoder with
/// zero biases.
ad::ParameterStore<float> init_params(std::size_t dim, std::size_t layers, Rng& rng);

/// Per-view mean-aggregation plan over the batch's local edges: receivers
/// are view sources, messages come from view destinations, weight 1/degree.
template <typename T>
struct ViewPlan {
  std::vector<std::uint32_t> receivers;
  std::shared_ptr<const ad::RowAggregation<T>> aggregation;
};

template <typename T>
struct MessagePlans {
  std::size_t node_count = 0;
  std::array<ViewPlan<T>, kViewCount> views;
};

/// Plans for `batch`, leaving out every edge (in both directions) of the
/// `masked` triples so that supervised links do not carry messages.
template <typename T>
MessagePlans<T> build_plans(const sampling::SubgraphBatch& batch,
                            std::span<const graph::LinkTriple> masked = {});

/// One encoder layer:
/// z'_i = act( sum_r sum_{j in A_i^r} (1/c_{i,r}) W_r z_j + W_0 z_i ).
/// States are rows, so each W acts from the right.
template <typename T>
Var rgcn_layer(ad::Tape<T>& tape, Var z, const MessagePlans<T>& plans,
               const ad::BoundParameters<T>& params, const RgcnLayout& layout, std::size_t layer,
               bool relu = true);

/// All layers; ReLU between layers, the last layer is linear.
template <typename T>
Var encode(ad::Tape<T>& tape, Var z0, const MessagePlans<T>& plans,
           const ad::BoundParameters<T>& params, const RgcnLayout& layout);

struct LocalTriple {
  std::uint32_t source = 0;  ///< row in the state matrix
  graph::Relation relation = graph::Relation::connect;
  std::uint32_t destination = 0;
};

/// Decoder logits MLP(z_s || M_r || z_d), one row per triple.
template <typename T>
Var link_logits(ad::Tape<T>& tape, Var z, std::span<const LocalTriple> triples,
                const ad::BoundParameters<T>& params, const RgcnLayout& layout);

/// Probability that (s, r, d) exists, from explicit state vectors.
double score_link(std::span<const float> z_s, graph::Relation r, std::span<const float> z_d,
                  const ad::ParameterStore<float>& params, const RgcnLayout& layout);

/// Final representations z^(L) for every entity, one matrix per kind.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::array<Matrix<float>, graph::kEntityKindCount> rows;

  std::span<const float> of(graph::EntityRef e) const { return rows[graph::index_of(e.kind)].row(e.id); }
  const Matrix<float>& kind(graph::EntityKind k) const { return rows[graph::index_of(k)]; }
  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

/// Initial features z^(0) (mean token vectors) laid out in global node order.
Matrix<float> initial_features(const graph::WhinStore& store, const text::TextTable& text);

/// Full-graph forward pass: every entity, every edge of `store`.
EmbeddingTable compute_embeddings(const graph::WhinStore& store, const text::TextTable& text,
                                  const ad::ParameterStore<float>& params, const RgcnLayout& layout);

/// Splits a global-order state matrix into per-kind tables.
EmbeddingTable split_by_kind(const graph::WhinStore& store, const Matrix<float>& states);

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double heldout_auc = 0.0;  ///< NaN when held-out evaluation is disabled
};

struct PretrainResult {
  ad::ParameterStore<float> params;
  RgcnLayout layout;
  EmbeddingTable table;
  std::vector<EpochStats> history;
  double heldout_auc = 0.0;         ///< after the last epoch
  double random_baseline_auc = 0.0; ///< frozen random embeddings, untrained decoder
};

/// Held-out natural edges and their corrupted counterparts.
struct HeldOutLinks {
  std::vector<graph::LinkTriple> positives;
  std::vector<graph::LinkTriple> negatives;
};

/// Picks round(fraction * |E_r|) edges of each natural relation and one
/// negative per edge, drawn against the full store.
HeldOutLinks hold_out_links(const graph::WhinStore& store, double fraction, Rng& rng);

/// Micro-averaged AUC of the decoder over held-out links given states in
/// global node order.
double heldout_auc(const graph::WhinStore& store, const Matrix<float>& states,
                   const HeldOutLinks& links, const ad::ParameterStore<float>& params,
                   const RgcnLayout& layout);

/// Stage-1 training. `store` must have its metapaths materialized; the
/// held-out edges are removed (and metapaths rebuilt) for training, and the
/// exported table comes from a full-graph pass over `store`.
PretrainResult train_pretrain(const graph::WhinStore& store, const text::TextTable& text,
                              const PretrainConfig& cfg);

void export_embeddings(const EmbeddingTable& table, const std::filesystem::path& dir);
/// Throws DependencyError for missing files, FormatError for bad content.
EmbeddingTable load_embeddings(const std::filesystem::path& dir);

/// Checkpoint directory: manifest.txt, embedding_<kind>.bin and
/// param_<name>.bin for every parameter.
void save_checkpoint(const std::filesystem::path& dir, const PretrainResult& result,
                     const PretrainConfig& cfg, const graph::WhinStore& store);

struct LoadedCheckpoint {
  ad::ParameterStore<float> params;
  RgcnLayout layout;
  EmbeddingTable table;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace whinpjf::pretrain
