#include "commands.hpp"

#include <fmt/format.h>

#include <cstdio>

#include "whinpjf/common/binary.hpp"
#include "whinpjf/common/error.hpp"
#include "whinpjf/common/log.hpp"
#include "whinpjf/graph/io.hpp"
#include "whinpjf/synth/generator.hpp"

namespace whinpjf::cli {
namespace {

Manifest load_run(const fs::path& dir) {
  const auto path = dir / kRunFile;
  if (!fs::exists(path)) throw DependencyError("missing " + path.string());
  return Manifest::load(path);
}

std::optional<fs::path> optional_path(const Manifest& m, std::string_view key) {
  const auto v = m.find(key);
  if (!v || v->empty()) return std::nullopt;
  return fs::path(*v);
}

eval::DataOptions data_options_of(const std::optional<fs::path>& pretrained, eval::DataOptions fallback) {
  if (!pretrained) return fallback;
  if (!fs::is_directory(*pretrained)) throw DependencyError("missing pre-training checkpoint " + pretrained->string());
  if (!fs::exists(*pretrained / kRunFile)) return fallback;
  return eval::DataOptions::from_manifest(load_run(*pretrained));
}

std::optional<pretrain::EmbeddingTable> load_structure(const std::optional<fs::path>& pretrained) {
  if (!pretrained) return std::nullopt;
  return pretrain::load_checkpoint(*pretrained).table;
}

void check_dims(const eval::DataOptions& data, const csagnn::CsagnnConfig& model,
                const std::optional<pretrain::EmbeddingTable>& table) {
  if (data.embedder.dim != model.dim) {
    throw ConfigError(fmt::format("text dim {} does not match model dim {}", data.embedder.dim, model.dim));
  }
  if (table && table->dim != model.dim) {
    throw ConfigError(fmt::format("pre-trained dim {} does not match model dim {}", table->dim, model.dim));
  }
}

}  // namespace

void run_synth(const SynthOptions& o) {
  auto cfg = synth::preset(o.preset);
  if (o.seed) cfg.seed = *o.seed;
  const auto data = synth::generate(cfg);
  synth::write_dataset(data, o.out);
  log::info("synth_done", {{"preset", cfg.name},
                           {"seed", cfg.seed},
                           {"members", data.store.count(graph::EntityKind::member)},
                           {"jobs", data.store.count(graph::EntityKind::job)},
                           {"pairs", data.store.pairs().size()},
                           {"out", o.out.string()}});
}

pretrain::PretrainResult run_pretrain(const PretrainOptions& o) {
  o.config.validate();
  if (o.data_options.embedder.dim != o.config.dim) throw ConfigError("text dim must equal the embedding dim");
  const auto data = eval::prepare(graph::read_tsv_dir(o.data), o.data_options);
  auto result = pretrain::train_pretrain(data.store, data.text, o.config);
  pretrain::save_checkpoint(o.out, result, o.config, data.store);
  Manifest run;
  run.set("command", std::string("pretrain"));
  run.set("data", o.data.string());
  o.data_options.to_manifest(run);
  run.save(o.out / kRunFile);
  log::info("pretrain_done", {{"heldout_auc", result.heldout_auc},
                              {"random_baseline_auc", result.random_baseline_auc},
                              {"out", o.out.string()}});
  return result;
}

csagnn::CsagnnResult run_train(const TrainOptions& o) {
  o.model.validate();
  const auto data_options = data_options_of(o.pretrained, o.data_options);
  const auto table = load_structure(o.pretrained);
  check_dims(data_options, o.model, table);
  const auto data = eval::prepare(graph::read_tsv_dir(o.data), data_options);
  const csagnn::Scorer scorer({&data.store, table ? &*table : nullptr, &data.text}, o.model);
  const auto parts = eval::split(data.store.pairs(), o.split);
  auto result = csagnn::train_csagnn(scorer, parts.train, parts.valid);
  csagnn::save_checkpoint(o.out, result, o.model);
  Manifest run = eval::to_manifest({o.model, o.split});
  run.set("command", std::string("train"));
  run.set("data", o.data.string());
  run.set("pretrained", o.pretrained ? o.pretrained->string() : std::string());
  data_options.to_manifest(run);
  run.save(o.out / kRunFile);
  log::info("train_done", {{"variant", csagnn::to_string(o.model.variant)},
                           {"best_epoch", result.best_epoch},
                           {"best_valid_auc", result.best_valid_auc},
                           {"out", o.out.string()}});
  return result;
}

eval::MetricsReport run_eval(const EvalOptions& o) {
  const auto model = csagnn::load_checkpoint(o.model);
  const Manifest run = load_run(o.model);
  const fs::path data_dir = o.data ? *o.data : fs::path(run.get("data"));
  const auto pretrained = o.pretrained ? o.pretrained : optional_path(run, "pretrained");
  const auto data_options = eval::DataOptions::from_manifest(run);
  eval::SplitSpec spec;
  spec.seed = run.get_u64("split_seed");
  const auto ratios = run.get("split_ratios");
  if (std::sscanf(ratios.c_str(), "%lf:%lf:%lf", &spec.ratios[0], &spec.ratios[1], &spec.ratios[2]) != 3) {
    throw FormatError("bad split_ratios '" + ratios + "' in " + (o.model / kRunFile).string());
  }
  const auto table = load_structure(pretrained);
  check_dims(data_options, model.config, table);
  const auto data = eval::prepare(graph::read_tsv_dir(data_dir), data_options);
  const csagnn::Scorer scorer({&data.store, table ? &*table : nullptr, &data.text}, model.config);
  const auto parts = eval::split(data.store.pairs(), spec);
  const std::vector<graph::CandidatePair>* chosen = nullptr;
  if (o.split == "train") chosen = &parts.train;
  else if (o.split == "valid") chosen = &parts.valid;
  else if (o.split == "test") chosen = &parts.test;
  else throw ConfigError("unknown split '" + o.split + "' (expected train, valid or test)");
  const auto scored = scorer.score_pairs(*chosen, model.params, model.layout);
  Manifest echo = eval::to_manifest({model.config, spec});
  echo.set("model", o.model.string());
  echo.set("data", data_dir.string());
  auto report = eval::make_report(scored, parts, o.split, std::move(echo));
  report.save(o.out ? *o.out : o.model / ("report_" + o.split + ".txt"));
  log::info("eval_done", {{"split", o.split}, {"auc", report.auc}, {"acc", report.acc},
                          {"f1", report.f1}, {"ap", report.ap}});
  return report;
}

void run_ablate(const AblateOptions& o) {
  if (o.seeds == 0) throw ConfigError("--seeds must be at least 1");
  fs::path pretrained;
  if (o.pretrained) {
    pretrained = *o.pretrained;
  } else {
    pretrained = o.out / "pretrained";
    run_pretrain({o.data, pretrained, o.pretrain, o.data_options});
  }
  const auto data_options = data_options_of(pretrained, o.data_options);
  const auto table = pretrain::load_checkpoint(pretrained).table;
  check_dims(data_options, o.model, table);
  const auto data = eval::prepare(graph::read_tsv_dir(o.data), data_options);

  std::string tsv = "variant\tseeds\tauc\tacc\tf1\tap\n";
  for (const auto variant : csagnn::all_variants()) {
    double auc = 0, acc = 0, f1 = 0, ap = 0;
    for (std::size_t s = 0; s < o.seeds; ++s) {
      eval::AblationConfig cfg{o.model, o.split};
      cfg.model.seed = o.model.seed + s;
      cfg.split.seed = o.split.seed + s;
      cfg.model.variant = variant;
      auto r = eval::run_ablation(variant, data, &table, cfg);
      const auto dir = o.out / csagnn::to_string(variant) / fmt::format("seed{}", s);
      csagnn::save_checkpoint(dir, r.result, cfg.model);
      Manifest run = eval::to_manifest(cfg);
      run.set("command", std::string("ablate"));
      run.set("data", o.data.string());
      run.set("pretrained", pretrained.string());
      data_options.to_manifest(run);
      run.save(dir / kRunFile);
      r.report.save(dir / "report_test.txt");
      auc += r.report.auc;
      acc += r.report.acc;
      f1 += r.report.f1;
      ap += r.report.ap;
    }
    const double n = static_cast<double>(o.seeds);
    tsv += fmt::format("{}\t{}\t{:.4f}\t{:.4f}\t{:.4f}\t{:.4f}\n", csagnn::to_string(variant), o.seeds, auc / n,
                       acc / n, f1 / n, ap / n);
  }
  fs::create_directories(o.out);
  binary::write_text(o.out / "ablation.tsv", tsv);
  Manifest run = eval::to_manifest({o.model, o.split});
  run.set("command", std::string("ablate"));
  run.set("data", o.data.string());
  run.set("pretrained", pretrained.string());
  run.set("seeds", std::uint64_t{o.seeds});
  data_options.to_manifest(run);
  run.save(o.out / kRunFile);
  log::info("ablate_done", {{"out", (o.out / "ablation.tsv").string()}});
}

eval::Projection run_pca(const PcaOptions& o) {
  const auto kind = graph::parse_entity_kind(o.kind);
  if (!kind) throw ConfigError("unknown entity kind '" + o.kind + "' (expected member, job, skill, company or school)");
  const auto table = pretrain::load_embeddings(o.ckpt);
  std::optional<fs::path> data = o.data;
  if (!data && fs::exists(o.ckpt / kRunFile)) data = optional_path(load_run(o.ckpt), "data");
  std::vector<std::uint32_t> labels;
  if (o.svg && data && fs::exists(*data / "truth.tsv")) {
    const auto truth = synth::read_truth(*data);
    switch (*kind) {
      case graph::EntityKind::member: labels = truth.member_pool; break;
      case graph::EntityKind::job: labels = truth.job_pool; break;
      case graph::EntityKind::skill: labels = truth.skill_pool; break;
      case graph::EntityKind::company: labels = truth.company_industry; break;
      case graph::EntityKind::school: labels = truth.school_industry; break;
    }
  }
  auto p = eval::pca_export(table, *kind, {}, o.out, o.svg, labels);
  log::info("pca_done", {{"kind", o.kind},
                         {"points", p.ids.size()},
                         {"variance_1", p.variances[0]},
                         {"variance_2", p.variances.size() > 1 ? p.variances[1] : 0.0},
                         {"out", o.out.string()}});
  return p;
}

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->category()) {
      case ErrorCategory::usage: return 1;
      case ErrorCategory::numeric: return 3;
      case ErrorCategory::data:
      case ErrorCategory::contract: return 2;
    }
  }
  return 2;
}

}  // namespace whinpjf::cli
