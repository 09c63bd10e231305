#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <map>

#include "commands.hpp"
#include "whinpjf/common/log.hpp"

using namespace whinpjf;

namespace {

void add_pretrain_flags(CLI::App* cmd, pretrain::PretrainConfig& c) {
  cmd->add_option("--dim", c.dim, "embedding dimension")->capture_default_str();
  cmd->add_option("--layers", c.layers, "RGCN layers")->capture_default_str();
  cmd->add_option("--hops", c.sampler.hops, "sampling hops")->capture_default_str();
  cmd->add_option("--fanout", c.sampler.fanout, "neighbors sampled per relation and hop")->capture_default_str();
  cmd->add_option("--negative-ratio", c.sampler.negative_ratio, "negatives per positive")->capture_default_str();
  cmd->add_option("--epochs", c.epochs)->capture_default_str();
  cmd->add_option("--batch-pairs", c.batch_pairs)->capture_default_str();
  cmd->add_option("--lr", c.learning_rate, "learning rate")->capture_default_str();
  cmd->add_option("--holdout", c.holdout_fraction, "held-out edge fraction")->capture_default_str();
}

void add_model_flags(CLI::App* cmd, csagnn::CsagnnConfig& c, std::string& variant) {
  cmd->add_option("--variant", variant, "full, wo_S, wo_A, wo_CSA or wo_CSA_H")->capture_default_str();
  cmd->add_option("--dim", c.dim, "feature dimension")->capture_default_str();
  cmd->add_option("--csagnn-layers", c.layers, "social encoder layers")->capture_default_str();
  cmd->add_option("--heads", c.heads, "attention heads")->capture_default_str();
  cmd->add_option("--skill-samples", c.skill_samples, "n_s")->capture_default_str();
  cmd->add_option("--connections", c.connections, "connections kept per member")->capture_default_str();
  cmd->add_option("--epochs", c.epochs)->capture_default_str();
  cmd->add_option("--batch-size", c.batch_size)->capture_default_str();
  cmd->add_option("--lr", c.learning_rate, "learning rate")->capture_default_str();
  cmd->add_option("--patience", c.patience, "early-stopping patience")->capture_default_str();
}

void add_data_flags(CLI::App* cmd, eval::DataOptions& d) {
  cmd->add_option("--metapath-cap", d.metapath_cap, "per-node metapath degree cap")->capture_default_str();
  cmd->add_option("--text-seed", d.embedder.seed, "hashed token embedder seed")->capture_default_str();
  cmd->add_option("--max-tokens", d.embedder.max_tokens)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage person-job fit on workplace heterogeneous networks"};
  app.require_subcommand(1);
  std::string level = "info";
  std::uint64_t seed = 0;
  app.add_option("--log-level", level, "debug, info, warn, error or off")->capture_default_str();
  app.add_option("--seed", seed, "root seed for every random stream")->capture_default_str();

  cli::SynthOptions synth;
  std::optional<std::uint64_t> synth_seed;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
  c_synth->add_option("--preset", synth.preset, "tech-100x, finance-100x or hybrid-100x")->required();
  c_synth->add_option("--out", synth.out)->required();
  c_synth->add_option("--data-seed", synth_seed, "generator seed (defaults to the preset's)");

  cli::PretrainOptions pre;
  auto* c_pre = app.add_subcommand("pretrain", "stage 1: link-level pre-training");
  c_pre->add_option("--data", pre.data)->required();
  c_pre->add_option("--out", pre.out)->required();
  add_pretrain_flags(c_pre, pre.config);
  add_data_flags(c_pre, pre.data_options);

  cli::TrainOptions train;
  std::string train_variant = "full";
  std::optional<std::uint64_t> train_split_seed;
  auto* c_train = app.add_subcommand("train", "stage 2: train a CSAGNN variant");
  c_train->add_option("--data", train.data)->required();
  c_train->add_option("--pretrained", train.pretrained, "stage-1 checkpoint (not needed for wo_CSA_H)");
  c_train->add_option("--out", train.out)->required();
  c_train->add_option("--split-seed", train_split_seed, "defaults to --seed");
  add_model_flags(c_train, train.model, train_variant);
  add_data_flags(c_train, train.data_options);

  cli::EvalOptions ev;
  auto* c_eval = app.add_subcommand("eval", "evaluate a trained model");
  c_eval->add_option("--model", ev.model)->required();
  c_eval->add_option("--data", ev.data, "defaults to the training data");
  c_eval->add_option("--pretrained", ev.pretrained, "defaults to the training checkpoint");
  c_eval->add_option("--split", ev.split, "train, valid or test")->capture_default_str();
  c_eval->add_option("--out", ev.out, "report path");

  cli::AblateOptions abl;
  std::string abl_variant;
  std::optional<std::uint64_t> abl_split_seed;
  auto* c_abl = app.add_subcommand("ablate", "train and evaluate all five variants");
  c_abl->add_option("--data", abl.data)->required();
  c_abl->add_option("--out", abl.out)->required();
  c_abl->add_option("--pretrained", abl.pretrained, "stage-1 checkpoint; pre-trains when absent");
  c_abl->add_option("--seeds", abl.seeds, "runs per variant, seeds --seed .. --seed+n-1")->capture_default_str();
  c_abl->add_option("--split-seed", abl_split_seed, "defaults to --seed");
  c_abl->add_option("--pretrain-epochs", abl.pretrain.epochs)->capture_default_str();
  c_abl->add_option("--pretrain-lr", abl.pretrain.learning_rate)->capture_default_str();
  add_model_flags(c_abl, abl.model, abl_variant);
  add_data_flags(c_abl, abl.data_options);

  cli::PcaOptions pca;
  auto* c_pca = app.add_subcommand("pca", "2-D PCA export of pre-trained embeddings");
  c_pca->add_option("--ckpt", pca.ckpt)->required();
  c_pca->add_option("--kind", pca.kind, "member, job, skill, company or school")->capture_default_str();
  c_pca->add_option("--out", pca.out, "CSV path")->required();
  c_pca->add_option("--svg", pca.svg, "scatter plot path");
  c_pca->add_option("--data", pca.data, "dataset with truth.tsv for colors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    static const std::map<std::string, log::Level> levels = {{"debug", log::Level::debug},
                                                             {"info", log::Level::info},
                                                             {"warn", log::Level::warn},
                                                             {"error", log::Level::error},
                                                             {"off", log::Level::off}};
    const auto it = levels.find(level);
    if (it == levels.end()) throw ConfigError("unknown log level '" + level + "'");
    log::set_level(it->second);

    if (c_synth->parsed()) {
      synth.seed = synth_seed;
      cli::run_synth(synth);
    } else if (c_pre->parsed()) {
      pre.config.seed = seed;
      pre.data_options.embedder.dim = pre.config.dim;
      pre.data_options.metapath_seed = seed;
      cli::run_pretrain(pre);
    } else if (c_train->parsed()) {
      train.model.variant = csagnn::parse_variant(train_variant);
      train.model.seed = seed;
      train.split.seed = train_split_seed.value_or(seed);
      train.data_options.embedder.dim = train.model.dim;
      train.data_options.metapath_seed = seed;
      cli::run_train(train);
    } else if (c_eval->parsed()) {
      const auto r = cli::run_eval(ev);
      std::fputs(r.to_string().c_str(), stdout);
    } else if (c_abl->parsed()) {
      abl.model.seed = seed;
      abl.split.seed = abl_split_seed.value_or(seed);
      abl.pretrain.seed = seed;
      abl.pretrain.dim = abl.model.dim;
      abl.data_options.embedder.dim = abl.model.dim;
      abl.data_options.metapath_seed = seed;
      cli::run_ablate(abl);
    } else if (c_pca->parsed()) {
      cli::run_pca(pca);
    }
  } catch (const std::exception& e) {
    const int code = cli::exit_code(e);
    std::fputs(fmt::format("error: {}\n", e.what()).c_str(), stderr);
    return code;
  }
  return 0;
}
