#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whinpjf/autodiff/parameters.hpp"
#include "whinpjf/eval/metrics.hpp"
#include "whinpjf/graph/store.hpp"
#include "whinpjf/pretrain/rgcn.hpp"
#include "whinpjf/text/embedder.hpp"

namespace whinpjf::csagnn {

using ad::Matrix;
using ad::Var;

enum class Variant : std::uint8_t { full, wo_S, wo_A, wo_CSA, wo_CSA_H };

std::string_view to_string(Variant v);
/// Throws ConfigError for unknown names.
Variant parse_variant(std::string_view name);
std::span<const Variant> all_variants();

/// What a variant keeps of the model.
struct VariantFlags {
  bool attention = true;   ///< job-specific attention over profile tokens (else mean pooling)
  bool relevance = true;   ///< relevance-ranked connections and alpha weights (else id order, uniform)
  bool social = true;      ///< professional-connection messages
  bool structure = true;   ///< pre-trained structural features
  bool text = true;        ///< text features
};
VariantFlags flags_of(Variant v);

struct CsagnnConfig {
  std::size_t dim = 32;
  std::size_t layers = 2;          ///< L_c
  std::size_t heads = 4;
  std::uint32_t skill_samples = 10;  ///< n_s
  std::size_t connections = 5;     ///< k
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t patience = 5;
  Variant variant = Variant::full;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Parameter handles. The scorer input is 4*dim for the social variants and
/// 2*dim for the two feature-only baselines.
struct CsagnnLayout {
  std::size_t dim = 0;
  std::size_t layers = 0;
  std::size_t heads = 0;
  std::size_t scorer_input = 0;
  ad::ParamHandle wq = 0, wk = 0, wv = 0, wo = 0;
  std::vector<ad::ParamHandle> w1, w2;  ///< per layer, 2*dim x 2*dim
  ad::ParamHandle s_w1 = 0, s_b1 = 0, s_w2 = 0, s_b2 = 0;

  static CsagnnLayout make(std::size_t dim, std::size_t layers, std::size_t heads, Variant variant);
  std::size_t head_dim() const { return dim / heads; }
  /// Throws FormatError when the store's names or shapes differ.
  template <typename T>
  void check(const ad::ParameterStore<T>& params) const;
};

ad::ParameterStore<float> init_params(const CsagnnLayout& layout, Rng& rng);

// ------------------------------------------------------------ operations

/// Multi-head attention with each query row (a required-skill embedding)
/// against the token rows, averaged over queries. Returns 1 x dim; zero for an
/// empty token matrix. Throws ContractError when `queries` has no rows.
template <typename T>
Var job_contextual_feature(ad::Tape<T>& tape, Var tokens, Var queries, const ad::BoundParameters<T>& params,
                           const CsagnnLayout& layout);

/// Row-wise attention distributions (heads * queries rows, one per (head,
/// query) in head-major order); used for the normalization checks.
template <typename T>
Matrix<T> attention_weights(const Matrix<T>& tokens, const Matrix<T>& queries, const ad::ParameterStore<T>& params,
                            const CsagnnLayout& layout);

/// h^(0) = F^c || F^s.
template <typename T>
Var init_member_feature(ad::Tape<T>& tape, Var contextual, Var structural);

struct SkillMean {
  std::vector<double> mean;
  bool degenerate = false;  ///< empty skill set; mean is zero
};

/// Arithmetic mean of rows `ids` of `embeddings`.
SkillMean skill_set_embedding(const Matrix<float>& embeddings, std::span<const std::uint32_t> ids);

struct Relevance {
  double value = 0.0;
  bool degenerate = false;
};

/// max(cos(a, b), 0); zero (flagged) when either vector is zero.
Relevance member_job_relevance(std::span<const double> member_mean, std::span<const double> job_mean);

/// d_j / sum d, or uniform when every d_j is zero. Throws ContractError on an
/// empty list.
std::vector<double> aggregation_weights(std::span<const double> relevances);

/// Per-entity n_s skill samples and their embedding means, fixed for a run.
struct SkillContext {
  std::vector<std::vector<std::uint32_t>> member_skills, job_skills;
  std::vector<SkillMean> member_mean, job_mean;

  /// Samples with Rng(seed).substream("skills", global id) for every entity.
  static SkillContext build(const graph::WhinStore& store, const pretrain::EmbeddingTable& structure,
                            std::uint32_t n_s, std::uint64_t seed);
};

/// The member's connect-neighbors ranked by relevance to the job (descending,
/// ties by ascending id), truncated to k.
std::vector<std::uint32_t> select_connections(const graph::WhinStore& store, std::uint32_t member,
                                              std::uint32_t job, std::size_t k, const SkillContext& skills);

/// Everything about one (member, job) pair that does not depend on the
/// trainable parameters.
struct PairContext {
  std::uint32_t member = 0;
  std::uint32_t job = 0;
  std::vector<std::uint32_t> nodes;  ///< local members; nodes[0] is the member
  ad::RowAggregation<double> alpha;  ///< row i: weights over the local neighbors of node i
  std::vector<std::uint32_t> query_skills;  ///< sampled required skills (queries)
};

/// Local graph of the member and its selected connections, with alpha from
/// relevances to the job (uniform and id-ordered when `flags.relevance` is off).
PairContext make_pair_context(const graph::WhinStore& store, std::uint32_t member, std::uint32_t job,
                              std::size_t k, const SkillContext& skills, const VariantFlags& flags);

/// Frozen inputs shared by every pair.
struct Features {
  const graph::WhinStore* store = nullptr;
  const pretrain::EmbeddingTable* structure = nullptr;  ///< F^s (may be null for wo_CSA_H)
  const text::TextTable* text = nullptr;
};

/// h_m: job-conditioned social forward, averaged over the L_c + 1 states.
template <typename T>
Var social_forward(ad::Tape<T>& tape, const PairContext& pair, const Features& features,
                   const ad::BoundParameters<T>& params, const CsagnnLayout& layout, const VariantFlags& flags);

/// h_j = mean job tokens || F^s_j.
std::vector<float> job_representation(std::uint32_t job, const Features& features);

/// Scorer logits for a list of pairs (n x 1); sigmoid gives the probability.
template <typename T>
Var pair_logits(ad::Tape<T>& tape, std::span<const PairContext> pairs, const Features& features,
                const ad::BoundParameters<T>& params, const CsagnnLayout& layout, Variant variant);

/// Probability for (member, job) given the hidden states.
double predict(std::span<const float> h_member, std::span<const float> h_job, const ad::ParameterStore<float>& params,
               const CsagnnLayout& layout);

// -------------------------------------------------------------- training

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_auc = 0.0;
};

struct CsagnnResult {
  ad::ParameterStore<float> params;  ///< best-validation parameters
  CsagnnLayout layout;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  double best_valid_auc = 0.0;
};

/// Frozen per-run state: skill samples and pair contexts.
class Scorer {
 public:
  Scorer(Features features, const CsagnnConfig& cfg);

  PairContext context(std::uint32_t member, std::uint32_t job) const;
  std::vector<PairContext> contexts(std::span<const graph::CandidatePair> pairs) const;
  /// Probabilities for the given contexts.
  std::vector<double> score(std::span<const PairContext> pairs, const ad::ParameterStore<float>& params,
                            const CsagnnLayout& layout) const;
  std::vector<eval::ScoredPair> score_pairs(std::span<const graph::CandidatePair> pairs,
                                            const ad::ParameterStore<float>& params,
                                            const CsagnnLayout& layout) const;

  const Features& features() const { return features_; }
  const SkillContext& skills() const { return skills_; }
  const CsagnnConfig& config() const { return cfg_; }

 private:
  Features features_;
  CsagnnConfig cfg_;
  VariantFlags flags_;
  SkillContext skills_;
};

/// Adam on the mean BCE over `train`, early stopping on AUC over `valid`.
CsagnnResult train_csagnn(const Scorer& scorer, std::span<const graph::CandidatePair> train,
                          std::span<const graph::CandidatePair> valid);

void save_checkpoint(const std::filesystem::path& dir, const CsagnnResult& result, const CsagnnConfig& cfg);

struct LoadedCheckpoint {
  CsagnnConfig config;
  CsagnnLayout layout;
  ad::ParameterStore<float> params;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace whinpjf::csagnn
