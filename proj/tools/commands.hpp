#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "whinpjf/csagnn/model.hpp"
#include "whinpjf/eval/ablation.hpp"
#include "whinpjf/eval/pca.hpp"
#include "whinpjf/pretrain/rgcn.hpp"

namespace whinpjf::cli {

namespace fs = std::filesystem;

/// Name of the run record every command writes next to its outputs.
inline constexpr const char* kRunFile = "run.txt";

struct SynthOptions {
  std::string preset;
  fs::path out;
  std::optional<std::uint64_t> seed;
};

struct PretrainOptions {
  fs::path data;
  fs::path out;
  pretrain::PretrainConfig config;
  eval::DataOptions data_options;
};

struct TrainOptions {
  fs::path data;
  std::optional<fs::path> pretrained;
  fs::path out;
  csagnn::CsagnnConfig model;
  eval::SplitSpec split;
  eval::DataOptions data_options;  ///< used when there is no pre-training run record
};

struct EvalOptions {
  fs::path model;
  std::optional<fs::path> data;        ///< defaults to the training run's data
  std::optional<fs::path> pretrained;  ///< defaults to the training run's checkpoint
  std::string split = "test";
  std::optional<fs::path> out;         ///< defaults to <model>/report_<split>.txt
};

struct AblateOptions {
  fs::path data;
  fs::path out;
  std::optional<fs::path> pretrained;  ///< pre-trains into <out>/pretrained when absent
  pretrain::PretrainConfig pretrain;
  eval::DataOptions data_options;
  csagnn::CsagnnConfig model;
  eval::SplitSpec split;
  std::size_t seeds = 1;
};

struct PcaOptions {
  fs::path ckpt;
  std::string kind = "skill";
  fs::path out;
  std::optional<fs::path> svg;
  std::optional<fs::path> data;  ///< dataset holding truth.tsv; defaults to the checkpoint's data
};

void run_synth(const SynthOptions& o);
pretrain::PretrainResult run_pretrain(const PretrainOptions& o);
csagnn::CsagnnResult run_train(const TrainOptions& o);
eval::MetricsReport run_eval(const EvalOptions& o);
void run_ablate(const AblateOptions& o);
eval::Projection run_pca(const PcaOptions& o);

/// 0 success, 1 usage, 2 data or format, 3 numeric.
int exit_code(const std::exception& e);

}  // namespace whinpjf::cli
