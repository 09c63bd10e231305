#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "whinpjf/common/manifest.hpp"
#include "whinpjf/graph/store.hpp"

namespace whinpjf::synth {

/// Knobs of the planted workplace network.
///
/// Skills are split into `industries * specialties` pools. Members and jobs
/// belong to one pool and draw most of their skills from it; every entity also
/// has a Gaussian local position, and skills and connections are picked with
/// weight exp(-|u - v|^2 / (2 l^2)) inside the chosen group. A positive
/// candidate pair is a job drawn with weight exp(overlap * cos), where cos is
/// the latent skill-mean cosine to the member or, with probability
/// `referral_rate`, to one of the member's connections picked uniformly.
struct GenConfig {
  std::string name = "custom";
  std::uint32_t industries = 1;
  std::uint32_t specialties = 3;

  std::uint32_t members = 60;
  std::uint32_t jobs = 80;
  std::uint32_t skills = 90;
  std::uint32_t companies = 8;
  std::uint32_t schools = 6;

  std::uint32_t pairs = 200;
  double positive_rate = 0.5;
  std::uint32_t connections = 300;
  double rho = 0.0;  ///< cross-industry connection fraction

  double overlap = 8.0;
  double referral_rate = 0.1;
  double pool_affinity = 0.5;  ///< weight of the shared pool direction in a skill's latent vector
  double homophily = 0.3;      ///< intra-industry connections that stay within the specialty
  std::uint32_t latent_dim = 2;     ///< local coordinates shared by all pools
  double skill_locality = 0.5;      ///< length scale of skill choice around an entity
  double connect_locality = 0.5;    ///< length scale of connection choice
  double pool_spread = 2.5;         ///< radius of the circle the pool centres sit on

  std::uint32_t member_skills_min = 3;
  std::uint32_t member_skills_max = 15;
  std::uint32_t job_skills_min = 3;
  std::uint32_t job_skills_max = 10;
  double off_pool_skill_rate = 0.2;
  double out_of_industry_skill_rate = 0.05;

  double text_skill_rate = 0.7;  ///< chance a mastered skill is named in the profile
  std::uint32_t filler_min = 8;
  std::uint32_t filler_max = 24;
  std::uint32_t history_per_member = 3;  ///< mean historical applies per member
  double negative_same_industry = 0.5;

  std::uint64_t seed = 0;

  std::uint32_t pool_count() const { return industries * specialties; }
  /// Throws ConfigError on invalid or infeasible settings.
  void validate() const;

  Manifest to_manifest() const;
  static GenConfig from_manifest(const Manifest& m);
};

/// Named presets: tech-100x, finance-100x, hybrid-100x.
std::vector<GenConfig> presets();
/// Throws ConfigError for an unknown name.
GenConfig preset(const std::string& name);

/// Planted assignments. Pools are numbered industry * specialties + specialty.
struct Truth {
  std::vector<std::uint32_t> member_pool;
  std::vector<std::uint32_t> job_pool;
  std::vector<std::uint32_t> skill_pool;
  std::vector<std::uint32_t> company_industry;
  std::vector<std::uint32_t> school_industry;

  friend bool operator==(const Truth&, const Truth&) = default;
};

struct Dataset {
  GenConfig config;
  graph::WhinStore store;
  Truth truth;
};

Dataset generate(const GenConfig& cfg);

/// Writes entities.tsv, relations.tsv, pairs.tsv, truth.tsv and a manifest.
void write_dataset(const Dataset& data, const std::filesystem::path& dir);
Truth read_truth(const std::filesystem::path& dir);

/// Cosine between latent skill means, skill s having latent vector
/// sqrt(a) e_pool(s) + sqrt(1 - a) e_s. Zero when either set is empty.
double latent_cosine(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                     std::span<const std::uint32_t> skill_pool, double pool_affinity);

}  // namespace whinpjf::synth
