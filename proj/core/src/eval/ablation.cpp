#include "whinpjf/eval/ablation.hpp"

#include <fmt/format.h>

#include "whinpjf/common/error.hpp"
#include "whinpjf/common/log.hpp"

namespace whinpjf::eval {

void DataOptions::to_manifest(Manifest& m) const {
  m.set("text.provider", std::string(embedder.provider == text::Provider::hashed ? "hashed" : "file"));
  m.set("text.dim", std::uint64_t{embedder.dim});
  m.set("text.max_tokens", std::uint64_t{embedder.max_tokens});
  m.set("text.seed", embedder.seed);
  if (embedder.provider == text::Provider::file) m.set("text.vocab_file", embedder.vocab_file.string());
  m.set("metapath_cap", std::uint64_t{metapath_cap});
  m.set("metapath_seed", metapath_seed);
}

DataOptions DataOptions::from_manifest(const Manifest& m) {
  DataOptions out;
  if (auto v = m.find("text.provider")) {
    if (*v == "file") out.embedder.provider = text::Provider::file;
    else if (*v != "hashed") throw FormatError("unknown text provider '" + *v + "'");
  }
  if (m.contains("text.dim")) out.embedder.dim = m.get_u64("text.dim");
  if (m.contains("text.max_tokens")) out.embedder.max_tokens = m.get_u64("text.max_tokens");
  if (m.contains("text.seed")) out.embedder.seed = m.get_u64("text.seed");
  if (auto v = m.find("text.vocab_file")) out.embedder.vocab_file = *v;
  if (m.contains("metapath_cap")) out.metapath_cap = static_cast<std::uint32_t>(m.get_u64("metapath_cap"));
  if (m.contains("metapath_seed")) out.metapath_seed = m.get_u64("metapath_seed");
  return out;
}

PreparedData prepare(const graph::WhinStore& natural, const DataOptions& options) {
  PreparedData out{graph::materialize_metapaths(natural, options.metapath_cap, options.metapath_seed), {}};
  const auto embedder = text::make_embedder(options.embedder);
  out.text = text::build_text_table(out.store, *embedder, options.embedder.max_tokens);
  return out;
}

Manifest to_manifest(const AblationConfig& cfg) {
  const auto& m = cfg.model;
  Manifest out;
  out.set("variant", std::string(csagnn::to_string(m.variant)));
  out.set("seed", m.seed);
  out.set("dim", std::uint64_t{m.dim});
  out.set("layers", std::uint64_t{m.layers});
  out.set("heads", std::uint64_t{m.heads});
  out.set("skill_samples", std::uint64_t{m.skill_samples});
  out.set("connections", std::uint64_t{m.connections});
  out.set("epochs", std::uint64_t{m.epochs});
  out.set("batch_size", std::uint64_t{m.batch_size});
  out.set("learning_rate", m.learning_rate);
  out.set("patience", std::uint64_t{m.patience});
  out.set("split_seed", cfg.split.seed);
  out.set("split_ratios", fmt::format("{}:{}:{}", cfg.split.ratios[0], cfg.split.ratios[1], cfg.split.ratios[2]));
  return out;
}

AblationRun run_ablation(csagnn::Variant variant, const PreparedData& data,
                         const pretrain::EmbeddingTable* structure, AblationConfig cfg) {
  cfg.model.variant = variant;
  const csagnn::Features features{&data.store, structure, &data.text};
  const csagnn::Scorer scorer(features, cfg.model);
  const Split parts = split(data.store.pairs(), cfg.split);
  AblationRun run;
  run.result = csagnn::train_csagnn(scorer, parts.train, parts.valid);
  const auto scored = scorer.score_pairs(parts.test, run.result.params, run.result.layout);
  auto echo = to_manifest(cfg);
  echo.set("best_epoch", std::uint64_t{run.result.best_epoch});
  run.report = make_report(scored, parts, "test", std::move(echo));
  log::info("ablation_run", {{"variant", csagnn::to_string(variant)},
                             {"seed", cfg.model.seed},
                             {"test_auc", run.report.auc / 100.0},
                             {"best_epoch", run.result.best_epoch}});
  return run;
}

}  // namespace whinpjf::eval
