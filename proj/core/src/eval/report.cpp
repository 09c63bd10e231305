#include "whinpjf/eval/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <json.hpp>

#include "whinpjf/common/binary.hpp"
#include "whinpjf/common/error.hpp"
#include "whinpjf/common/random.hpp"

namespace whinpjf::eval {

void SplitSpec::validate() const {
  for (double r : ratios) {
    if (!(r > 0) || !std::isfinite(r)) throw ConfigError("split ratios must be positive");
  }
}

Split split(std::span<const graph::CandidatePair> pairs, const SplitSpec& spec) {
  spec.validate();
  if (pairs.size() < 10) throw ConfigError(fmt::format("split needs at least 10 pairs, got {}", pairs.size()));
  std::vector<graph::CandidatePair> all(pairs.begin(), pairs.end());
  Rng(spec.seed).substream("split").shuffle(all);
  const double total = spec.ratios[0] + spec.ratios[1] + spec.ratios[2];
  const auto n = static_cast<double>(all.size());
  // The epsilon keeps 100 * 0.8 from landing at 79.999...
  const auto n_train = static_cast<std::size_t>(std::floor(n * spec.ratios[0] / total + 1e-9));
  const auto n_valid = static_cast<std::size_t>(std::floor(n * spec.ratios[1] / total + 1e-9));
  Split out;
  out.train.assign(all.begin(), all.begin() + n_train);
  out.valid.assign(all.begin() + n_train, all.begin() + n_train + n_valid);
  out.test.assign(all.begin() + n_train + n_valid, all.end());
  return out;
}

std::string MetricsReport::to_string() const {
  std::string out;
  auto line = [&](std::string_view k, const std::string& v) { out += fmt::format("{}={}\n", k, v); };
  line("split", split_name);
  line("auc", fmt::format("{:.4f}", auc));
  line("acc", fmt::format("{:.4f}", acc));
  line("f1", fmt::format("{:.4f}", f1));
  line("ap", fmt::format("{:.4f}", ap));
  line("pairs.train", std::to_string(train_pairs));
  line("pairs.valid", std::to_string(valid_pairs));
  line("pairs.test", std::to_string(test_pairs));
  nlohmann::ordered_json j;
  j["split"] = split_name;
  j["metrics"] = {{"auc", auc}, {"acc", acc}, {"f1", f1}, {"ap", ap}};
  j["pairs"] = {{"train", train_pairs}, {"valid", valid_pairs}, {"test", test_pairs}};
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.entries()) {
    line("config." + k, v);
    cfg[k] = v;
  }
  j["config"] = cfg;
  out += "\n" + j.dump(2) + "\n";
  return out;
}

void MetricsReport::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  binary::write_text(path, to_string());
}

MetricsReport make_report(std::span<const ScoredPair> scored, const Split& split, std::string split_name,
                          Manifest config) {
  const auto c = acc_f1_ap(scored);
  MetricsReport r;
  r.auc = 100.0 * auc(scored);
  r.acc = 100.0 * c.acc;
  r.f1 = 100.0 * c.f1;
  r.ap = 100.0 * c.ap;
  r.train_pairs = split.train.size();
  r.valid_pairs = split.valid.size();
  r.test_pairs = split.test.size();
  r.split_name = std::move(split_name);
  r.config = std::move(config);
  return r;
}

}  // namespace whinpjf::eval
