#include "whinpjf/csagnn/model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "whinpjf/common/error.hpp"
#include "whinpjf/common/log.hpp"
#include "whinpjf/common/manifest.hpp"
#include "whinpjf/common/threads.hpp"
#include "whinpjf/model/checkpoint.hpp"
#include "whinpjf/sampling/sampler.hpp"

namespace whinpjf::csagnn {

using graph::EntityKind;
using graph::Relation;

namespace {

constexpr ad::ParamHandle kAbsent = std::numeric_limits<ad::ParamHandle>::max();
constexpr std::array<Variant, 5> kVariants = {Variant::full, Variant::wo_S, Variant::wo_A, Variant::wo_CSA,
                                              Variant::wo_CSA_H};
constexpr std::array<std::string_view, 5> kVariantNames = {"full", "wo_S", "wo_A", "wo_CSA", "wo_CSA_H"};

bool uses_social_encoder(Variant v) { return v == Variant::full || v == Variant::wo_S || v == Variant::wo_A; }

struct ParamSpec {
  std::string name;
  std::size_t rows;
  std::size_t cols;
};

std::vector<ParamSpec> param_specs(const CsagnnLayout& l) {
  std::vector<ParamSpec> specs;
  const std::size_t d = l.dim;
  if (l.wq != kAbsent) {
    for (const char* n : {"mha.wq", "mha.wk", "mha.wv", "mha.wo"}) specs.push_back({n, d, d});
  }
  for (std::size_t i = 0; i < l.layers; ++i) {
    specs.push_back({fmt::format("l{}.w1", i), 2 * d, 2 * d});
    specs.push_back({fmt::format("l{}.w2", i), 2 * d, 2 * d});
  }
  specs.push_back({"scorer.w1", l.scorer_input, d});
  specs.push_back({"scorer.b1", 1, d});
  specs.push_back({"scorer.w2", d, 1});
  specs.push_back({"scorer.b2", 1, 1});
  return specs;
}

template <typename T>
Matrix<T> rows_of(const Matrix<float>& table, std::span<const std::uint32_t> ids) {
  Matrix<T> out(ids.size(), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto src = table.row(ids[i]);
    for (std::size_t c = 0; c < src.size(); ++c) out(i, c) = static_cast<T>(src[c]);
  }
  return out;
}

template <typename T>
Matrix<T> row_matrix(std::span<const float> values) {
  Matrix<T> out(1, values.size());
  for (std::size_t c = 0; c < values.size(); ++c) out(0, c) = static_cast<T>(values[c]);
  return out;
}

template <typename T>
Matrix<T> concat_values(std::span<const float> a, std::span<const float> b) {
  Matrix<T> out(1, a.size() + b.size());
  for (std::size_t c = 0; c < a.size(); ++c) out(0, c) = static_cast<T>(a[c]);
  for (std::size_t c = 0; c < b.size(); ++c) out(0, a.size() + c) = static_cast<T>(b[c]);
  return out;
}

const Matrix<float>& structure_of(const Features& f, EntityKind kind) {
  if (!f.structure) throw DependencyError("variant needs pre-trained structural embeddings");
  return f.structure->kind(kind);
}

const text::TextTable& text_of(const Features& f) {
  if (!f.text) throw DependencyError("variant needs the text table");
  return *f.text;
}

}  // namespace

// ----------------------------------------------------------------- variants

std::string_view to_string(Variant v) { return kVariantNames[static_cast<std::size_t>(v)]; }

Variant parse_variant(std::string_view name) {
  for (std::size_t i = 0; i < kVariants.size(); ++i) {
    if (kVariantNames[i] == name) return kVariants[i];
  }
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected full, wo_S, wo_A, wo_CSA or wo_CSA_H)");
}

std::span<const Variant> all_variants() { return kVariants; }

VariantFlags flags_of(Variant v) {
  VariantFlags f;
  switch (v) {
    case Variant::full:
      break;
    case Variant::wo_S:
      f.social = false;
      break;
    case Variant::wo_A:
      f.attention = false;
      f.relevance = false;
      break;
    case Variant::wo_CSA:
      f = {false, false, false, true, false};
      break;
    case Variant::wo_CSA_H:
      f = {false, false, false, false, true};
      break;
  }
  return f;
}

void CsagnnConfig::validate() const {
  if (dim == 0 || heads == 0) throw ConfigError("csagnn: dim and heads must be positive");
  if (dim % heads != 0) throw ConfigError(fmt::format("csagnn: dim {} is not divisible by {} heads", dim, heads));
  if (skill_samples == 0) throw ConfigError("csagnn: skill samples must be positive");
  if (connections == 0) throw ConfigError("csagnn: connection fanout must be positive");
  if (batch_size == 0) throw ConfigError("csagnn: batch size must be positive");
  if (!(learning_rate > 0)) throw ConfigError("csagnn: learning rate must be positive");
  if (patience == 0) throw ConfigError("csagnn: patience must be positive");
}

// ------------------------------------------------------------------- layout

CsagnnLayout CsagnnLayout::make(std::size_t dim, std::size_t layers, std::size_t heads, Variant variant) {
  CsagnnLayout l;
  l.dim = dim;
  l.heads = heads;
  const bool social_encoder = uses_social_encoder(variant);
  l.layers = social_encoder ? layers : 0;
  l.scorer_input = social_encoder ? 4 * dim : 2 * dim;
  ad::ParamHandle next = 0;
  if (flags_of(variant).attention) {
    l.wq = next++;
    l.wk = next++;
    l.wv = next++;
    l.wo = next++;
  } else {
    l.wq = l.wk = l.wv = l.wo = kAbsent;
  }
  for (std::size_t i = 0; i < l.layers; ++i) {
    l.w1.push_back(next++);
    l.w2.push_back(next++);
  }
  l.s_w1 = next++;
  l.s_b1 = next++;
  l.s_w2 = next++;
  l.s_b2 = next++;
  return l;
}

template <typename T>
void CsagnnLayout::check(const ad::ParameterStore<T>& params) const {
  const auto specs = param_specs(*this);
  if (params.size() != specs.size()) {
    throw FormatError(fmt::format("model expects {} parameters, found {}", specs.size(), params.size()));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& v = params.value(i);
    if (params.name(i) != specs[i].name || v.rows() != specs[i].rows || v.cols() != specs[i].cols) {
      throw FormatError(fmt::format("model parameter {} is {} {}, expected {} {}x{}", i, params.name(i),
                                    ad::shape_string(v), specs[i].name, specs[i].rows, specs[i].cols));
    }
  }
}

template void CsagnnLayout::check(const ad::ParameterStore<float>&) const;
template void CsagnnLayout::check(const ad::ParameterStore<double>&) const;

ad::ParameterStore<float> init_params(const CsagnnLayout& layout, Rng& rng) {
  ad::ParameterStore<float> store;
  for (const auto& spec : param_specs(layout)) {
    const bool bias = spec.name == "scorer.b1" || spec.name == "scorer.b2";
    store.add(spec.name, bias ? Matrix<float>(spec.rows, spec.cols) : ad::glorot_uniform(spec.rows, spec.cols, rng));
  }
  return store;
}

// --------------------------------------------------------------- attention

template <typename T>
Var job_contextual_feature(ad::Tape<T>& tape, Var tokens, Var queries, const ad::BoundParameters<T>& params,
                           const CsagnnLayout& layout) {
  if (tape.value(queries).rows() == 0) throw ContractError("job_contextual_feature: no required-skill queries");
  if (layout.wq == kAbsent) throw ContractError("job_contextual_feature: layout has no attention parameters");
  if (tape.value(tokens).rows() == 0) return tape.constant(Matrix<T>(1, layout.dim));
  const std::size_t dh = layout.head_dim();
  const Var q = tape.matmul(queries, params[layout.wq]);
  const Var k = tape.matmul(tokens, params[layout.wk]);
  const Var v = tape.matmul(tokens, params[layout.wv]);
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  std::vector<Var> heads;
  for (std::size_t h = 0; h < layout.heads; ++h) {
    const Var qh = tape.slice_cols(q, h * dh, dh);
    const Var kh = tape.slice_cols(k, h * dh, dh);
    const Var vh = tape.slice_cols(v, h * dh, dh);
    const Var attn = tape.softmax_rows(tape.scale(tape.matmul_nt(qh, kh), inv_sqrt));
    heads.push_back(tape.matmul(attn, vh));
  }
  // The output projection is linear, so averaging over queries first is exact.
  return tape.matmul(tape.mean_rows(tape.concat_cols(heads)), params[layout.wo]);
}

template <typename T>
Matrix<T> attention_weights(const Matrix<T>& tokens, const Matrix<T>& queries, const ad::ParameterStore<T>& params,
                            const CsagnnLayout& layout) {
  ad::Tape<T> tape;
  const ad::BoundParameters<T> bound(tape, params);
  const std::size_t dh = layout.head_dim();
  const Var q = tape.matmul(tape.constant(queries), bound[layout.wq]);
  const Var k = tape.matmul(tape.constant(tokens), bound[layout.wk]);
  std::vector<Var> rows;
  for (std::size_t h = 0; h < layout.heads; ++h) {
    const Var s = tape.matmul_nt(tape.slice_cols(q, h * dh, dh), tape.slice_cols(k, h * dh, dh));
    rows.push_back(tape.softmax_rows(tape.scale(s, T(1) / std::sqrt(static_cast<T>(dh)))));
  }
  return tape.value(tape.concat_rows(rows));
}

template <typename T>
Var init_member_feature(ad::Tape<T>& tape, Var contextual, Var structural) {
  const Var parts[] = {contextual, structural};
  return tape.concat_cols(parts);
}

// ---------------------------------------------------------------- relevance

SkillMean skill_set_embedding(const Matrix<float>& embeddings, std::span<const std::uint32_t> ids) {
  SkillMean out;
  out.mean.assign(embeddings.cols(), 0.0);
  if (ids.empty()) {
    out.degenerate = true;
    return out;
  }
  for (auto id : ids) {
    const auto row = embeddings.row(id);
    for (std::size_t c = 0; c < row.size(); ++c) out.mean[c] += row[c];
  }
  for (double& v : out.mean) v /= static_cast<double>(ids.size());
  return out;
}

Relevance member_job_relevance(std::span<const double> member_mean, std::span<const double> job_mean) {
  if (member_mean.size() != job_mean.size()) throw DimensionError("member_job_relevance: length mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < member_mean.size(); ++i) {
    dot += member_mean[i] * job_mean[i];
    na += member_mean[i] * member_mean[i];
    nb += job_mean[i] * job_mean[i];
  }
  if (na == 0 || nb == 0) return {0.0, true};
  return {std::max(dot / std::sqrt(na * nb), 0.0), false};
}

std::vector<double> aggregation_weights(std::span<const double> relevances) {
  if (relevances.empty()) throw ContractError("aggregation_weights: empty neighbor list");
  double total = 0;
  for (double d : relevances) {
    if (!(d >= 0) || !std::isfinite(d)) throw ContractError("aggregation_weights: relevance must be finite and >= 0");
    total += d;
  }
  std::vector<double> out(relevances.size());
  if (total == 0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = relevances[i] / total;
  }
  return out;
}

SkillContext SkillContext::build(const graph::WhinStore& store, const pretrain::EmbeddingTable& structure,
                                 std::uint32_t n_s, std::uint64_t seed) {
  const Rng root(seed);
  const Matrix<float>& skills = structure.kind(EntityKind::skill);
  SkillContext ctx;
  auto sample = [&](graph::EntityRef e, Relation r) {
    Rng rng = root.substream("skills", store.global_id(e));
    return sampling::sample_skills(store.neighbors(e, r), n_s, rng);
  };
  for (std::uint32_t m = 0; m < store.count(EntityKind::member); ++m) {
    ctx.member_skills.push_back(sample(graph::member(m), Relation::master));
    ctx.member_mean.push_back(skill_set_embedding(skills, ctx.member_skills.back()));
  }
  for (std::uint32_t j = 0; j < store.count(EntityKind::job); ++j) {
    ctx.job_skills.push_back(sample(graph::job(j), Relation::require));
    ctx.job_mean.push_back(skill_set_embedding(skills, ctx.job_skills.back()));
  }
  return ctx;
}

std::vector<std::uint32_t> select_connections(const graph::WhinStore& store, std::uint32_t member, std::uint32_t job,
                                              std::size_t k, const SkillContext& skills) {
  const auto nb = store.neighbors(graph::member(member), Relation::connect);
  std::vector<std::pair<double, std::uint32_t>> ranked;
  ranked.reserve(nb.size());
  for (auto c : nb) ranked.emplace_back(member_job_relevance(skills.member_mean[c].mean, skills.job_mean[job].mean).value, c);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) out.push_back(ranked[i].second);
  return out;
}

PairContext make_pair_context(const graph::WhinStore& store, std::uint32_t member, std::uint32_t job, std::size_t k,
                              const SkillContext& skills, const VariantFlags& flags) {
  PairContext p;
  p.member = member;
  p.job = job;
  p.nodes.push_back(member);
  if (flags.social) {
    std::vector<std::uint32_t> chosen;
    if (flags.relevance) {
      chosen = select_connections(store, member, job, k, skills);
    } else {
      const auto nb = store.neighbors(graph::member(member), Relation::connect);
      chosen.assign(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(std::min(k, nb.size())));
    }
    p.nodes.insert(p.nodes.end(), chosen.begin(), chosen.end());
  }
  std::vector<double> d;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    d.clear();
    const std::size_t start = p.alpha.index.size();
    if (flags.social) {
      for (std::size_t j = 0; j < p.nodes.size(); ++j) {
        if (i == j || !store.has_edge(Relation::connect, p.nodes[i], p.nodes[j])) continue;
        p.alpha.index.push_back(static_cast<std::uint32_t>(j));
        d.push_back(flags.relevance
                        ? member_job_relevance(skills.member_mean[p.nodes[j]].mean, skills.job_mean[job].mean).value
                        : 1.0);
      }
    }
    if (!d.empty()) {
      const auto w = aggregation_weights(d);
      p.alpha.weight.insert(p.alpha.weight.end(), w.begin(), w.end());
    }
    p.alpha.offsets.push_back(static_cast<std::uint32_t>(start + d.size()));
  }
  if (flags.attention) p.query_skills = skills.job_skills[job];
  return p;
}

// ----------------------------------------------------------------- forward

template <typename T>
Var social_forward(ad::Tape<T>& tape, const PairContext& pair, const Features& features,
                   const ad::BoundParameters<T>& params, const CsagnnLayout& layout, const VariantFlags& flags) {
  const auto& text = text_of(features);
  const Matrix<float>& member_structure = structure_of(features, EntityKind::member);
  const bool attend = flags.attention && !pair.query_skills.empty();
  Var queries;
  if (attend) queries = tape.constant(rows_of<T>(structure_of(features, EntityKind::skill), pair.query_skills));

  std::vector<Var> h0;
  for (auto node : pair.nodes) {
    const graph::EntityRef ref = graph::member(node);
    Var contextual;
    if (attend) {
      contextual = job_contextual_feature(tape, tape.constant(text.tokens_of(ref).template cast<T>()), queries,
                                          params, layout);
    } else {
      contextual = tape.constant(row_matrix<T>(text.mean_of(ref)));
    }
    h0.push_back(init_member_feature(tape, contextual, tape.constant(row_matrix<T>(member_structure.row(node)))));
  }
  Var h = tape.concat_rows(h0);

  std::shared_ptr<const ad::RowAggregation<T>> plan;
  if (!pair.alpha.index.empty()) {
    auto agg = std::make_shared<ad::RowAggregation<T>>();
    agg->offsets = pair.alpha.offsets;
    agg->index = pair.alpha.index;
    for (double w : pair.alpha.weight) agg->weight.push_back(static_cast<T>(w));
    plan = std::move(agg);
  }

  Var total = tape.slice_rows(h, 0, 1);
  for (std::size_t l = 0; l < layout.layers; ++l) {
    Var next = tape.matmul(h, params[layout.w1[l]]);
    if (plan) next = tape.add(next, tape.matmul(tape.aggregate(h, plan), params[layout.w2[l]]));
    h = tape.relu(next);
    total = tape.add(total, tape.slice_rows(h, 0, 1));
  }
  return tape.scale(total, T(1) / static_cast<T>(layout.layers + 1));
}

std::vector<float> job_representation(std::uint32_t job, const Features& features) {
  const auto tokens = text_of(features).mean_of(graph::job(job));
  const auto structure = structure_of(features, EntityKind::job).row(job);
  std::vector<float> out(tokens.begin(), tokens.end());
  out.insert(out.end(), structure.begin(), structure.end());
  return out;
}

template <typename T>
Var pair_logits(ad::Tape<T>& tape, std::span<const PairContext> pairs, const Features& features,
                const ad::BoundParameters<T>& params, const CsagnnLayout& layout, Variant variant) {
  if (pairs.empty()) throw EmptyInputError("pair_logits: no pairs");
  const VariantFlags flags = flags_of(variant);
  std::vector<Var> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (uses_social_encoder(variant)) {
      const auto hj = job_representation(p.job, features);
      const Var parts[] = {social_forward(tape, p, features, params, layout, flags),
                           tape.constant(row_matrix<T>(hj))};
      rows.push_back(tape.concat_cols(parts));
    } else if (variant == Variant::wo_CSA) {
      rows.push_back(tape.constant(concat_values<T>(structure_of(features, EntityKind::member).row(p.member),
                                                    structure_of(features, EntityKind::job).row(p.job))));
    } else {
      const auto& text = text_of(features);
      rows.push_back(tape.constant(concat_values<T>(text.mean_of(graph::member(p.member)), text.mean_of(graph::job(p.job)))));
    }
  }
  const Var x = tape.concat_rows(rows);
  const Var hidden = tape.relu(tape.add_bias(tape.matmul(x, params[layout.s_w1]), params[layout.s_b1]));
  return tape.add_bias(tape.matmul(hidden, params[layout.s_w2]), params[layout.s_b2]);
}

double predict(std::span<const float> h_member, std::span<const float> h_job, const ad::ParameterStore<float>& params,
               const CsagnnLayout& layout) {
  const Matrix<float>& w1 = params.value(layout.s_w1);
  const Matrix<float>& b1 = params.value(layout.s_b1);
  const Matrix<float>& w2 = params.value(layout.s_w2);
  if (h_member.size() + h_job.size() != w1.rows()) {
    throw DimensionError(fmt::format("predict: {} + {} inputs for a scorer of width {}", h_member.size(), h_job.size(),
                                     w1.rows()));
  }
  double logit = params.value(layout.s_b2)(0, 0);
  for (std::size_t k = 0; k < w1.cols(); ++k) {
    double a = b1(0, k);
    for (std::size_t i = 0; i < h_member.size(); ++i) a += static_cast<double>(h_member[i]) * w1(i, k);
    for (std::size_t i = 0; i < h_job.size(); ++i) a += static_cast<double>(h_job[i]) * w1(h_member.size() + i, k);
    logit += std::max(a, 0.0) * w2(k, 0);
  }
  return 1.0 / (1.0 + std::exp(-logit));
}

// ------------------------------------------------------------------ scorer

Scorer::Scorer(Features features, const CsagnnConfig& cfg)
    : features_(features), cfg_(cfg), flags_(flags_of(cfg.variant)) {
  cfg_.validate();
  if (!features_.store) throw ContractError("scorer: missing store");
  if (flags_.structure || flags_.relevance || flags_.attention) {
    if (!features_.structure) throw DependencyError("variant " + std::string(to_string(cfg.variant)) +
                                                    " needs pre-trained structural embeddings");
    if (features_.structure->dim != cfg.dim) {
      throw ConfigError(fmt::format("structural embedding dim {} differs from model dim {}", features_.structure->dim, cfg.dim));
    }
    for (EntityKind kind : graph::kAllEntityKinds) {
      if (features_.structure->kind(kind).rows() != features_.store->count(kind)) {
        throw FormatError("structural embeddings do not cover the store's " + std::string(graph::to_string(kind)) + "s");
      }
    }
    skills_ = SkillContext::build(*features_.store, *features_.structure, cfg.skill_samples, cfg.seed);
  }
  if (flags_.text) {
    if (!features_.text) throw DependencyError("variant needs the text table");
    if (features_.text->dim != cfg.dim) {
      throw ConfigError(fmt::format("text embedding dim {} differs from model dim {}", features_.text->dim, cfg.dim));
    }
  }
}

PairContext Scorer::context(std::uint32_t member, std::uint32_t job) const {
  const auto& store = *features_.store;
  if (member >= store.count(EntityKind::member) || job >= store.count(EntityKind::job)) {
    throw ContractError(fmt::format("pair ({}, {}) is outside the store", member, job));
  }
  if (!flags_.social && !flags_.attention) {
    PairContext p;
    p.member = member;
    p.job = job;
    p.nodes = {member};
    p.alpha.offsets = {0, 0};
    return p;
  }
  return make_pair_context(store, member, job, cfg_.connections, skills_, flags_);
}

std::vector<PairContext> Scorer::contexts(std::span<const graph::CandidatePair> pairs) const {
  std::vector<PairContext> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) { out[i] = context(pairs[i].member, pairs[i].job); });
  return out;
}

std::vector<double> Scorer::score(std::span<const PairContext> pairs, const ad::ParameterStore<float>& params,
                                  const CsagnnLayout& layout) const {
  constexpr std::size_t kChunk = 64;
  std::vector<double> out(pairs.size());
  const std::size_t chunks = (pairs.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t n = std::min(kChunk, pairs.size() - begin);
    ad::Tape<float> tape;
    const ad::BoundParameters<float> bound(tape, params);
    const Matrix<float>& logits =
        tape.value(pair_logits(tape, pairs.subspan(begin, n), features_, bound, layout, cfg_.variant));
    for (std::size_t i = 0; i < n; ++i) out[begin + i] = 1.0 / (1.0 + std::exp(-static_cast<double>(logits(i, 0))));
  });
  return out;
}

std::vector<eval::ScoredPair> Scorer::score_pairs(std::span<const graph::CandidatePair> pairs,
                                                  const ad::ParameterStore<float>& params,
                                                  const CsagnnLayout& layout) const {
  const auto ctx = contexts(pairs);
  const auto scores = score(ctx, params, layout);
  std::vector<eval::ScoredPair> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.push_back({pairs[i].member, pairs[i].job, scores[i], pairs[i].label});
  }
  return out;
}

// ---------------------------------------------------------------- training

CsagnnResult train_csagnn(const Scorer& scorer, std::span<const graph::CandidatePair> train,
                          std::span<const graph::CandidatePair> valid) {
  const CsagnnConfig& cfg = scorer.config();
  if (train.empty()) throw ConfigError("csagnn: no training pairs");
  if (valid.empty()) throw ConfigError("csagnn: no validation pairs");
  const Rng root(cfg.seed);
  CsagnnResult result;
  result.layout = CsagnnLayout::make(cfg.dim, cfg.layers, cfg.heads, cfg.variant);
  {
    Rng init = root.substream("init");
    result.params = init_params(result.layout, init);
  }
  const CsagnnLayout& layout = result.layout;
  ad::ParameterStore<float> params = result.params;

  const auto train_ctx = scorer.contexts(train);
  const auto valid_ctx = scorer.contexts(valid);
  std::vector<std::uint8_t> valid_labels;
  for (const auto& p : valid) valid_labels.push_back(p.label);

  ad::Adam<float> adam({cfg.learning_rate, 0.9, 0.999, 1e-8}, params);
  result.best_valid_auc = -1.0;
  std::vector<PairContext> batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::uint32_t> order(train.size());
    std::iota(order.begin(), order.end(), 0u);
    Rng shuffle = root.substream("epoch", epoch);
    shuffle.shuffle(order);

    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - begin);
      batch.clear();
      Matrix<float> labels(n, 1);
      for (std::size_t i = 0; i < n; ++i) {
        batch.push_back(train_ctx[order[begin + i]]);
        labels(i, 0) = train[order[begin + i]].label;
      }
      ad::Tape<float> tape;
      const ad::BoundParameters<float> bound(tape, params);
      const Var loss =
          tape.bce_with_logits(pair_logits(tape, batch, scorer.features(), bound, layout, cfg.variant), labels);
      const double lv = tape.value(loss)(0, 0);
      if (!std::isfinite(lv)) {
        throw NumericError(fmt::format("csagnn training diverged: loss {} at epoch {} batch {}", lv, epoch + 1, batches));
      }
      tape.backward(loss);
      adam.step(params, bound.gradients(tape));
      if (!params.all_finite()) {
        throw NumericError(fmt::format("csagnn training produced non-finite weights at epoch {}", epoch + 1));
      }
      loss_sum += lv;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.train_loss = loss_sum / static_cast<double>(batches);
    stats.valid_auc = eval::auc(scorer.score(valid_ctx, params, layout), valid_labels);
    result.history.push_back(stats);
    log::info("csagnn_epoch", {{"variant", to_string(cfg.variant)},
                               {"epoch", stats.epoch},
                               {"loss", stats.train_loss},
                               {"valid_auc", stats.valid_auc}});
    if (stats.valid_auc > result.best_valid_auc) {
      result.best_valid_auc = stats.valid_auc;
      result.best_epoch = stats.epoch;
      result.params = params;
    } else if (stats.epoch - result.best_epoch >= cfg.patience) {
      log::info("csagnn_early_stop", {{"epoch", stats.epoch}, {"best_epoch", result.best_epoch}});
      break;
    }
  }
  return result;
}

// -------------------------------------------------------------- checkpoint

namespace {

constexpr std::uint64_t kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const CsagnnResult& result, const CsagnnConfig& cfg) {
  std::filesystem::create_directories(dir);
  const VariantFlags flags = flags_of(cfg.variant);
  Manifest m;
  m.set("format", "whin-csagnn");
  m.set("format_version", kCheckpointVersion);
  m.set("variant", std::string(to_string(cfg.variant)));
  m.set("dim", std::uint64_t{cfg.dim});
  m.set("layers", std::uint64_t{cfg.layers});
  m.set("heads", std::uint64_t{cfg.heads});
  m.set("skill_samples", std::uint64_t{cfg.skill_samples});
  m.set("connections", std::uint64_t{cfg.connections});
  m.set("epochs", std::uint64_t{cfg.epochs});
  m.set("batch_size", std::uint64_t{cfg.batch_size});
  m.set("learning_rate", cfg.learning_rate);
  m.set("patience", std::uint64_t{cfg.patience});
  m.set("seed", cfg.seed);
  m.set("flag.attention", std::uint64_t{flags.attention});
  m.set("flag.relevance", std::uint64_t{flags.relevance});
  m.set("flag.social", std::uint64_t{flags.social});
  m.set("flag.structure", std::uint64_t{flags.structure});
  m.set("flag.text", std::uint64_t{flags.text});
  for (const auto& e : result.history) {
    m.set(fmt::format("epoch.{}.loss", e.epoch), e.train_loss);
    m.set(fmt::format("epoch.{}.valid_auc", e.epoch), e.valid_auc);
  }
  m.set("best_epoch", std::uint64_t{result.best_epoch});
  m.set("best_valid_auc", result.best_valid_auc);
  m.save(dir / "manifest.txt");
  model::save_parameters(dir, "param_", result.params);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DependencyError("missing model checkpoint " + dir.string());
  const Manifest m = Manifest::load(dir / "manifest.txt");
  if (m.get("format") != "whin-csagnn") throw FormatError(dir.string() + " is not a model checkpoint");
  if (m.get_u64("format_version") != kCheckpointVersion) {
    throw FormatError(dir.string() + ": unsupported checkpoint version " + m.get("format_version"));
  }
  LoadedCheckpoint out;
  out.config.variant = parse_variant(m.get("variant"));
  out.config.dim = m.get_u64("dim");
  out.config.layers = m.get_u64("layers");
  out.config.heads = m.get_u64("heads");
  out.config.skill_samples = static_cast<std::uint32_t>(m.get_u64("skill_samples"));
  out.config.connections = m.get_u64("connections");
  out.config.epochs = m.get_u64("epochs");
  out.config.batch_size = m.get_u64("batch_size");
  out.config.learning_rate = m.get_double("learning_rate");
  out.config.patience = m.get_u64("patience");
  out.config.seed = m.get_u64("seed");
  out.config.validate();
  out.layout = CsagnnLayout::make(out.config.dim, out.config.layers, out.config.heads, out.config.variant);
  for (const auto& spec : param_specs(out.layout)) out.params.add(spec.name, Matrix<float>(spec.rows, spec.cols));
  model::load_parameters(dir, "param_", out.params);
  return out;
}

// ---------------------------------------------------------- instantiation

#define WHINPJF_INSTANTIATE(T)                                                                                  \
  template Var job_contextual_feature<T>(ad::Tape<T>&, Var, Var, const ad::BoundParameters<T>&,                \
                                         const CsagnnLayout&);                                                  \
  template Matrix<T> attention_weights<T>(const Matrix<T>&, const Matrix<T>&, const ad::ParameterStore<T>&,   \
                                          const CsagnnLayout&);                                                 \
  template Var init_member_feature<T>(ad::Tape<T>&, Var, Var);                                                  \
  template Var social_forward<T>(ad::Tape<T>&, const PairContext&, const Features&,                            \
                                 const ad::BoundParameters<T>&, const CsagnnLayout&, const VariantFlags&);     \
  template Var pair_logits<T>(ad::Tape<T>&, std::span<const PairContext>, const Features&,                     \
                              const ad::BoundParameters<T>&, const CsagnnLayout&, Variant);

WHINPJF_INSTANTIATE(float)
WHINPJF_INSTANTIATE(double)

#undef WHINPJF_INSTANTIATE

}  // namespace whinpjf::csagnn
