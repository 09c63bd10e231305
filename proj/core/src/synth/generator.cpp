#include "whinpjf/synth/generator.hpp"

#include <algorithm>
#include <charconv>
#include <numbers>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "whinpjf/common/binary.hpp"
#include "whinpjf/common/error.hpp"
#include "whinpjf/common/log.hpp"
#include "whinpjf/common/random.hpp"
#include "whinpjf/graph/io.hpp"

namespace whinpjf::synth {
namespace {

using graph::EntityKind;
using graph::Relation;

constexpr std::uint32_t kFillerVocabulary = 300;
constexpr std::string_view kTruthFile = "truth.tsv";
constexpr std::string_view kManifestFile = "manifest.txt";

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("synth: " + what);
}

double pairs_capacity(double n) { return n * (n - 1.0) / 2.0; }

/// Distinct lowercase pseudo-words made of consonant-vowel syllables.
class WordSource {
 public:
  explicit WordSource(Rng rng) : rng_(rng) {}

  std::string next() {
    static constexpr std::string_view consonants = "bdfgklmnprstvz";
    static constexpr std::string_view vowels = "aeiou";
    while (true) {
      std::string w;
      const auto syllables = 2 + rng_.below(3);
      for (std::uint64_t s = 0; s < syllables; ++s) {
        w += consonants[rng_.below(consonants.size())];
        w += vowels[rng_.below(vowels.size())];
      }
      if (rng_.bernoulli(0.3)) w += consonants[rng_.below(consonants.size())];
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng rng_;
  std::unordered_set<std::string> used_;
};

/// Skill set summarized for latent cosines.
struct Profile {
  std::vector<std::uint32_t> skills;  // sorted
  std::vector<double> pool_counts;
  double norm = 0.0;
};

Profile make_profile(std::vector<std::uint32_t> skills, std::span<const std::uint32_t> skill_pool,
                     std::uint32_t pools, double affinity) {
  Profile p;
  std::sort(skills.begin(), skills.end());
  p.pool_counts.assign(pools, 0.0);
  for (auto s : skills) p.pool_counts[skill_pool[s]] += 1.0;
  double sq = 0.0;
  for (double c : p.pool_counts) sq += c * c;
  p.norm = std::sqrt(affinity * sq + (1.0 - affinity) * static_cast<double>(skills.size()));
  p.skills = std::move(skills);
  return p;
}

double profile_cosine(const Profile& a, const Profile& b, double affinity) {
  if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
  double pool_dot = 0.0;
  for (std::size_t i = 0; i < a.pool_counts.size(); ++i) pool_dot += a.pool_counts[i] * b.pool_counts[i];
  std::size_t shared = 0;
  auto ia = a.skills.begin();
  auto ib = b.skills.begin();
  while (ia != a.skills.end() && ib != b.skills.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return (affinity * pool_dot + (1.0 - affinity) * static_cast<double>(shared)) / (a.norm * b.norm);
}

class Generator {
 public:
  explicit Generator(const GenConfig& cfg) : cfg_(cfg), root_(cfg.seed), pools_(cfg.pool_count()) {}

  Dataset run() {
    assign_pools();
    draw_skills();
    name_entities();
    draw_organizations();
    draw_connections();
    score_pairs();
    draw_candidates();
    draw_history();
    write_texts();

    graph::StoreBuilder b;
    for (auto kind : graph::kAllEntityKinds) {
      auto& texts = texts_[graph::index_of(kind)];
      for (std::uint32_t i = 0; i < texts.size(); ++i) b.add_entity(kind, i, std::move(texts[i]));
    }
    for (std::size_t r = 0; r < graph::kNaturalRelationCount; ++r) {
      for (const auto& [s, d] : edges_[r]) b.add_edge(static_cast<Relation>(r), s, d);
    }
    for (const auto& p : pairs_) b.add_pair(p.member, p.job, p.label);
    return Dataset{cfg_, b.build(), truth_};
  }

 private:
  std::uint32_t industry_of_pool(std::uint32_t pool) const { return pool / cfg_.specialties; }

  void assign_pools() {
    Rng rng = root_.substream("assign");
    auto assign = [&](std::uint32_t n) {
      std::vector<std::uint32_t> out(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        out[i] = (i % cfg_.industries) * cfg_.specialties +
                 static_cast<std::uint32_t>(rng.below(cfg_.specialties));
      }
      return out;
    };
    truth_.member_pool = assign(cfg_.members);
    truth_.job_pool = assign(cfg_.jobs);
    truth_.skill_pool.resize(cfg_.skills);
    pool_skills_.assign(pools_, {});
    for (std::uint32_t s = 0; s < cfg_.skills; ++s) {
      truth_.skill_pool[s] = s % pools_;
      pool_skills_[s % pools_].push_back(s);
    }
    truth_.company_industry.resize(cfg_.companies);
    for (std::uint32_t c = 0; c < cfg_.companies; ++c) truth_.company_industry[c] = c % cfg_.industries;
    truth_.school_industry.resize(cfg_.schools);
    for (std::uint32_t c = 0; c < cfg_.schools; ++c) truth_.school_industry[c] = c % cfg_.industries;
    members_by_industry_.assign(cfg_.industries, {});
    members_by_pool_.assign(pools_, {});
    for (std::uint32_t m = 0; m < cfg_.members; ++m) {
      members_by_industry_[industry_of_pool(truth_.member_pool[m])].push_back(m);
      members_by_pool_[truth_.member_pool[m]].push_back(m);
    }
    jobs_by_industry_.assign(cfg_.industries, {});
    for (std::uint32_t j = 0; j < cfg_.jobs; ++j) {
      jobs_by_industry_[industry_of_pool(truth_.job_pool[j])].push_back(j);
    }
    Rng latent = root_.substream("latent");
    // Pool p is centred at angle 2 pi p / P on a circle of radius pool_spread.
    auto draw = [&](std::uint32_t n, auto pool_of) {
      std::vector<double> out(std::size_t{n} * cfg_.latent_dim);
      for (std::uint32_t i = 0; i < n; ++i) {
        const double angle = 2.0 * std::numbers::pi * pool_of(i) / pools_;
        for (std::uint32_t c = 0; c < cfg_.latent_dim; ++c) {
          double centre = 0.0;
          if (c == 0) centre = cfg_.pool_spread * std::cos(angle);
          if (c == 1) centre = cfg_.pool_spread * std::sin(angle);
          out[std::size_t{i} * cfg_.latent_dim + c] = centre + latent.normal();
        }
      }
      return out;
    };
    // Organization c belongs to industry c % K; it sits in that industry's
    // specialties in turn.
    auto org_pool = [&](std::uint32_t c) {
      return (c % cfg_.industries) * cfg_.specialties + (c / cfg_.industries) % cfg_.specialties;
    };
    member_pos_ = draw(cfg_.members, [&](std::uint32_t i) { return truth_.member_pool[i]; });
    job_pos_ = draw(cfg_.jobs, [&](std::uint32_t i) { return truth_.job_pool[i]; });
    skill_pos_ = draw(cfg_.skills, [&](std::uint32_t i) { return truth_.skill_pool[i]; });
    company_pos_ = draw(cfg_.companies, org_pool);
    school_pos_ = draw(cfg_.schools, org_pool);
  }

  /// Pool a skill is drawn from for an entity living in `home`.
  std::uint32_t source_pool(std::uint32_t home, Rng& rng) const {
    const double u = rng.uniform();
    const std::uint32_t k = industry_of_pool(home);
    if (cfg_.industries > 1 && u < cfg_.out_of_industry_skill_rate) {
      std::uint32_t other = static_cast<std::uint32_t>(rng.below(cfg_.industries - 1));
      if (other >= k) ++other;
      return other * cfg_.specialties + static_cast<std::uint32_t>(rng.below(cfg_.specialties));
    }
    const double off = cfg_.off_pool_skill_rate +
                       (cfg_.industries > 1 ? 0.0 : cfg_.out_of_industry_skill_rate);
    if (cfg_.specialties > 1 && u < cfg_.out_of_industry_skill_rate + off) {
      std::uint32_t other = static_cast<std::uint32_t>(rng.below(cfg_.specialties - 1));
      if (other >= home % cfg_.specialties) ++other;
      return k * cfg_.specialties + other;
    }
    return home;
  }

  double sq_distance(std::span<const double> a, std::span<const double> b) const {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
  }

  std::span<const double> position(const std::vector<double>& table, std::uint32_t i) const {
    return {table.data() + std::size_t{i} * cfg_.latent_dim, cfg_.latent_dim};
  }

  std::vector<std::uint32_t> skill_set(std::uint32_t home, std::span<const double> at, std::uint32_t lo,
                                       std::uint32_t hi, Rng& rng) {
    const auto n = lo + static_cast<std::uint32_t>(rng.below(hi - lo + 1));
    const double scale = 2.0 * cfg_.skill_locality * cfg_.skill_locality;
    std::vector<std::uint32_t> out;
    while (out.size() < n) {
      const auto& pool = pool_skills_[source_pool(home, rng)];
      weights_.resize(pool.size());
      double total = 0.0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const bool taken = std::find(out.begin(), out.end(), pool[i]) != out.end();
        weights_[i] = taken ? 0.0 : std::exp(-sq_distance(at, position(skill_pos_, pool[i])) / scale);
        total += weights_[i];
      }
      if (total <= 0.0) continue;
      out.push_back(pool[rng.weighted(weights_)]);
    }
    return out;
  }

  void draw_skills() {
    Rng rng = root_.substream("skills");
    for (std::uint32_t m = 0; m < cfg_.members; ++m) {
      auto skills = skill_set(truth_.member_pool[m], position(member_pos_, m), cfg_.member_skills_min,
                              cfg_.member_skills_max, rng);
      for (auto s : skills) add_edge(Relation::master, m, s);
      member_profiles_.push_back(make_profile(std::move(skills), truth_.skill_pool, pools_, cfg_.pool_affinity));
    }
    for (std::uint32_t j = 0; j < cfg_.jobs; ++j) {
      auto skills = skill_set(truth_.job_pool[j], position(job_pos_, j), cfg_.job_skills_min,
                              cfg_.job_skills_max, rng);
      for (auto s : skills) add_edge(Relation::require, j, s);
      job_profiles_.push_back(make_profile(std::move(skills), truth_.skill_pool, pools_, cfg_.pool_affinity));
    }
  }

  void name_entities() {
    WordSource words(root_.substream("names"));
    for (std::uint32_t s = 0; s < cfg_.skills; ++s) skill_names_.push_back(words.next());
    for (std::uint32_t c = 0; c < cfg_.companies; ++c) company_names_.push_back(words.next());
    for (std::uint32_t c = 0; c < cfg_.schools; ++c) school_names_.push_back(words.next());
    for (std::uint32_t f = 0; f < kFillerVocabulary; ++f) filler_.push_back(words.next());
  }

  /// Organization for an entity at `at` in industry k: with probability
  /// `stay` a nearby one of the same industry, otherwise any.
  std::uint32_t pick_organization(const std::vector<double>& positions, std::uint32_t count, std::uint32_t k,
                                  double stay, std::span<const double> at, Rng& rng) {
    if (!rng.bernoulli(stay)) return static_cast<std::uint32_t>(rng.below(count));
    // Organizations of industry k sit at k, k + K, k + 2K, ...
    const double scale = 2.0 * cfg_.skill_locality * cfg_.skill_locality;
    weights_.clear();
    for (std::uint32_t c = k; c < count; c += cfg_.industries) {
      weights_.push_back(std::exp(-sq_distance(at, position(positions, c)) / scale));
    }
    double total = 0.0;
    for (double w : weights_) total += w;
    const auto local = total > 0.0 ? rng.weighted(weights_) : rng.below(weights_.size());
    return k + cfg_.industries * static_cast<std::uint32_t>(local);
  }

  void draw_organizations() {
    Rng rng = root_.substream("organizations");
    member_company_.resize(cfg_.members);
    job_company_.resize(cfg_.jobs);
    for (std::uint32_t m = 0; m < cfg_.members; ++m) {
      const auto k = industry_of_pool(truth_.member_pool[m]);
      const auto at = position(member_pos_, m);
      member_company_[m] = pick_organization(company_pos_, cfg_.companies, k, 0.9, at, rng);
      add_edge(Relation::work_at, m, member_company_[m]);
      add_edge(Relation::attend, m, pick_organization(school_pos_, cfg_.schools, k, 0.7, at, rng));
      if (rng.bernoulli(0.3)) {
        add_edge(Relation::attend, m, pick_organization(school_pos_, cfg_.schools, k, 0.7, at, rng));
      }
    }
    for (std::uint32_t j = 0; j < cfg_.jobs; ++j) {
      job_company_[j] = pick_organization(company_pos_, cfg_.companies, industry_of_pool(truth_.job_pool[j]),
                                          1.0, position(job_pos_, j), rng);
      add_edge(Relation::post, j, job_company_[j]);
    }
  }

  void draw_connections() {
    Rng rng = root_.substream("connect");
    neighbors_.assign(cfg_.members, {});
    const std::size_t n = cfg_.members;
    std::vector<std::uint8_t> linked(n * n, 0);
    const double scale = 2.0 * cfg_.connect_locality * cfg_.connect_locality;
    const std::uint64_t budget = 200ULL * cfg_.connections + 1000;
    std::uint64_t attempts = 0;
    std::uint32_t placed = 0;
    while (placed < cfg_.connections) {
      if (++attempts > budget) {
        throw ConfigError(fmt::format("synth: could only place {} of {} connections", placed,
                                      cfg_.connections));
      }
      const auto a = static_cast<std::uint32_t>(rng.below(cfg_.members));
      const std::uint32_t pool = truth_.member_pool[a];
      const std::uint32_t k = industry_of_pool(pool);
      const std::vector<std::uint32_t>* group;
      if (cfg_.industries > 1 && rng.bernoulli(cfg_.rho)) {
        auto other = static_cast<std::uint32_t>(rng.below(cfg_.industries - 1));
        if (other >= k) ++other;
        group = &members_by_industry_[other];
      } else if (rng.bernoulli(cfg_.homophily)) {
        group = &members_by_pool_[pool];
      } else {
        group = &members_by_industry_[k];
      }
      weights_.resize(group->size());
      double total = 0.0;
      for (std::size_t i = 0; i < group->size(); ++i) {
        const std::uint32_t b = (*group)[i];
        weights_[i] = (b == a || linked[a * n + b])
                          ? 0.0
                          : std::exp(-sq_distance(position(member_pos_, a), position(member_pos_, b)) / scale);
        total += weights_[i];
      }
      if (total <= 0.0) continue;
      const std::uint32_t b = (*group)[rng.weighted(weights_)];
      linked[a * n + b] = linked[b * n + a] = 1;
      add_edge(Relation::connect, std::min(a, b), std::max(a, b));
      neighbors_[a].push_back(b);
      neighbors_[b].push_back(a);
      ++placed;
    }
  }

  /// Latent cosine for every (member, job).
  void score_pairs() {
    const std::size_t jobs = cfg_.jobs;
    cosine_.assign(std::size_t{cfg_.members} * jobs, 0.0);
    for (std::uint32_t m = 0; m < cfg_.members; ++m) {
      for (std::uint32_t j = 0; j < jobs; ++j) {
        cosine_[m * jobs + j] = profile_cosine(member_profiles_[m], job_profiles_[j], cfg_.pool_affinity);
      }
    }
  }

  /// Job for member m: drawn by its own profile, or on referral by the
  /// profile of a random connection.
  std::uint32_t draw_applied_job(std::uint32_t m, Rng& rng) {
    const std::size_t jobs = cfg_.jobs;
    std::uint32_t by = m;
    if (!neighbors_[m].empty() && rng.bernoulli(cfg_.referral_rate)) {
      by = neighbors_[m][rng.below(neighbors_[m].size())];
    }
    weights_.resize(jobs);
    for (std::uint32_t j = 0; j < jobs; ++j) {
      const bool taken = used_.count(pair_key(m, j)) > 0;
      weights_[j] = taken ? 0.0 : std::exp(cfg_.overlap * cosine_[by * jobs + j]);
    }
    return static_cast<std::uint32_t>(rng.weighted(weights_));
  }

  static std::uint64_t pair_key(std::uint32_t m, std::uint32_t j) {
    return (std::uint64_t{m} << 32) | j;
  }

  bool member_has_room(std::uint32_t m) const { return taken_per_member_[m] < cfg_.jobs; }

  void draw_candidates() {
    Rng rng = root_.substream("pairs");
    taken_per_member_.assign(cfg_.members, 0);
    const auto positives = static_cast<std::uint32_t>(std::llround(cfg_.positive_rate * cfg_.pairs));
    for (std::uint32_t i = 0; i < cfg_.pairs; ++i) {
      auto m = static_cast<std::uint32_t>(rng.below(cfg_.members));
      while (!member_has_room(m)) m = static_cast<std::uint32_t>(rng.below(cfg_.members));
      std::uint32_t j;
      if (i < positives) {
        j = draw_applied_job(m, rng);
      } else {
        do {
          j = pick_negative_job(m, rng);
        } while (used_.count(pair_key(m, j)) > 0);
      }
      used_.insert(pair_key(m, j));
      ++taken_per_member_[m];
      pairs_.push_back({m, j, static_cast<std::uint8_t>(i < positives ? 1 : 0)});
    }
    std::sort(pairs_.begin(), pairs_.end(), [](const auto& a, const auto& b) {
      return std::tie(a.member, a.job) < std::tie(b.member, b.job);
    });
  }

  std::uint32_t pick_negative_job(std::uint32_t m, Rng& rng) const {
    const auto& local = jobs_by_industry_[industry_of_pool(truth_.member_pool[m])];
    if (!local.empty() && rng.bernoulli(cfg_.negative_same_industry)) return local[rng.below(local.size())];
    return static_cast<std::uint32_t>(rng.below(cfg_.jobs));
  }

  void draw_history() {
    if (cfg_.history_per_member == 0) return;
    Rng rng = root_.substream("history");
    for (std::uint32_t m = 0; m < cfg_.members; ++m) {
      auto n = 1 + static_cast<std::uint32_t>(rng.below(2 * cfg_.history_per_member - 1));
      n = std::min(n, cfg_.jobs - taken_per_member_[m]);
      for (std::uint32_t i = 0; i < n; ++i) {
        const auto j = draw_applied_job(m, rng);
        used_.insert(pair_key(m, j));
        ++taken_per_member_[m];
        add_edge(Relation::apply, m, j);
      }
    }
  }

  void write_texts() {
    Rng rng = root_.substream("text");
    std::vector<std::string> words;
    auto add_filler = [&] {
      const auto n = cfg_.filler_min + rng.below(cfg_.filler_max - cfg_.filler_min + 1);
      for (std::uint64_t i = 0; i < n; ++i) words.push_back(filler_[rng.below(filler_.size())]);
    };
    auto join = [&] {
      rng.shuffle(words);
      std::string out;
      for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
      }
      words.clear();
      return out;
    };
    auto& members = texts_[graph::index_of(EntityKind::member)];
    for (std::uint32_t m = 0; m < cfg_.members; ++m) {
      for (auto s : member_profiles_[m].skills) {
        if (rng.bernoulli(cfg_.text_skill_rate)) words.push_back(skill_names_[s]);
      }
      words.push_back(company_names_[member_company_[m]]);
      add_filler();
      members.push_back(join());
    }
    auto& jobs = texts_[graph::index_of(EntityKind::job)];
    for (std::uint32_t j = 0; j < cfg_.jobs; ++j) {
      for (auto s : job_profiles_[j].skills) words.push_back(skill_names_[s]);
      words.push_back(company_names_[job_company_[j]]);
      add_filler();
      jobs.push_back(join());
    }
    texts_[graph::index_of(EntityKind::skill)] = skill_names_;
    texts_[graph::index_of(EntityKind::company)] = company_names_;
    auto& schools = texts_[graph::index_of(EntityKind::school)];
    for (const auto& n : school_names_) schools.push_back(n + " university");
  }

  void add_edge(Relation r, std::uint32_t s, std::uint32_t d) {
    edges_[graph::index_of(r)].emplace_back(s, d);
  }

  const GenConfig& cfg_;
  Rng root_;
  std::uint32_t pools_;
  Truth truth_;
  std::vector<std::vector<std::uint32_t>> pool_skills_, members_by_industry_, members_by_pool_,
      jobs_by_industry_, neighbors_;
  std::vector<Profile> member_profiles_, job_profiles_;
  std::vector<std::string> skill_names_, company_names_, school_names_, filler_;
  std::vector<std::uint32_t> member_company_, job_company_, taken_per_member_;
  std::vector<double> cosine_, weights_, member_pos_, job_pos_, skill_pos_,
      company_pos_, school_pos_;
  std::unordered_set<std::uint64_t> used_;
  std::vector<graph::CandidatePair> pairs_;
  std::array<std::vector<std::pair<std::uint32_t, std::uint32_t>>, graph::kNaturalRelationCount> edges_;
  std::array<std::vector<std::string>, graph::kEntityKindCount> texts_;
};

struct Field {
  std::string_view key;
  std::uint32_t GenConfig::*u32 = nullptr;
  double GenConfig::*f64 = nullptr;
};

constexpr Field kFields[] = {
    {"industries", &GenConfig::industries},
    {"specialties", &GenConfig::specialties},
    {"members", &GenConfig::members},
    {"jobs", &GenConfig::jobs},
    {"skills", &GenConfig::skills},
    {"companies", &GenConfig::companies},
    {"schools", &GenConfig::schools},
    {"pairs", &GenConfig::pairs},
    {"positive_rate", nullptr, &GenConfig::positive_rate},
    {"connections", &GenConfig::connections},
    {"rho", nullptr, &GenConfig::rho},
    {"overlap", nullptr, &GenConfig::overlap},
    {"referral_rate", nullptr, &GenConfig::referral_rate},
    {"pool_affinity", nullptr, &GenConfig::pool_affinity},
    {"homophily", nullptr, &GenConfig::homophily},
    {"latent_dim", &GenConfig::latent_dim},
    {"skill_locality", nullptr, &GenConfig::skill_locality},
    {"connect_locality", nullptr, &GenConfig::connect_locality},
    {"pool_spread", nullptr, &GenConfig::pool_spread},
    {"member_skills_min", &GenConfig::member_skills_min},
    {"member_skills_max", &GenConfig::member_skills_max},
    {"job_skills_min", &GenConfig::job_skills_min},
    {"job_skills_max", &GenConfig::job_skills_max},
    {"off_pool_skill_rate", nullptr, &GenConfig::off_pool_skill_rate},
    {"out_of_industry_skill_rate", nullptr, &GenConfig::out_of_industry_skill_rate},
    {"text_skill_rate", nullptr, &GenConfig::text_skill_rate},
    {"filler_min", &GenConfig::filler_min},
    {"filler_max", &GenConfig::filler_max},
    {"history_per_member", &GenConfig::history_per_member},
    {"negative_same_industry", nullptr, &GenConfig::negative_same_industry},
};

}  // namespace

void GenConfig::validate() const {
  require(industries >= 1 && specialties >= 1, "industries and specialties must be >= 1");
  for (auto [n, what] : {std::pair{members, "members"}, {jobs, "jobs"}, {skills, "skills"},
                         {companies, "companies"}, {schools, "schools"}}) {
    require(n >= industries, fmt::format("{} ({}) must be at least the industry count", what, n));
  }
  require(pairs >= 1 && connections >= 1, "pair and connection counts must be >= 1");
  require(positive_rate > 0.0 && positive_rate < 1.0, "positive_rate must lie in (0, 1)");
  require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0, 1]");
  require(industries > 1 || rho == 0.0, "rho must be 0 with a single industry");
  require(pool_affinity >= 0.0 && pool_affinity < 1.0, "pool_affinity must lie in [0, 1)");
  for (double p : {homophily, off_pool_skill_rate, out_of_industry_skill_rate, text_skill_rate,
                   negative_same_industry, referral_rate}) {
    require(p >= 0.0 && p <= 1.0, "rates must lie in [0, 1]");
  }
  require(off_pool_skill_rate + out_of_industry_skill_rate <= 1.0, "skill source rates exceed 1");
  require(std::isfinite(overlap), "overlap must be finite");
  require(member_skills_min >= 1 && member_skills_min <= member_skills_max, "bad member skill range");
  require(job_skills_min >= 1 && job_skills_min <= job_skills_max, "bad job skill range");
  require(filler_min <= filler_max, "bad filler range");
  require(latent_dim >= 1, "latent_dim must be >= 1");
  require(skill_locality > 0.0 && connect_locality > 0.0, "locality scales must be positive");
  require(pool_spread >= 0.0, "pool_spread must be >= 0");
  const std::uint32_t pool_size = skills / pool_count();
  require(pool_size >= std::max(member_skills_max, job_skills_max),
          fmt::format("each skill pool holds {} skills, fewer than the {} an entity may need", pool_size,
                      std::max(member_skills_max, job_skills_max)));
  const double m = members;
  const double per_industry = m / industries;
  const double intra = industries * pairs_capacity(std::floor(per_industry));
  const double cross = pairs_capacity(m) - intra;
  require((1.0 - rho) * connections <= 0.6 * intra && rho * connections <= 0.6 * cross + 1e-9,
          fmt::format("{} connections do not fit {} members at rho {}", connections, members, rho));
  require(pairs + std::uint64_t{members} * (2 * history_per_member) <=
              std::uint64_t{members} * jobs / 2,
          "too many candidate pairs and applications for the member-job grid");
}

Manifest GenConfig::to_manifest() const {
  Manifest m;
  m.set("format", std::string("whin-synth"));
  m.set("format_version", std::uint64_t{1});
  m.set("name", name);
  m.set("seed", seed);
  for (const auto& f : kFields) {
    if (f.u32) {
      m.set(std::string(f.key), std::uint64_t{this->*f.u32});
    } else {
      m.set(std::string(f.key), this->*f.f64);
    }
  }
  return m;
}

GenConfig GenConfig::from_manifest(const Manifest& m) {
  if (m.get("format") != "whin-synth") throw FormatError("not a synthetic dataset manifest");
  GenConfig cfg;
  cfg.name = m.get("name");
  cfg.seed = m.get_u64("seed");
  for (const auto& f : kFields) {
    if (f.u32) {
      cfg.*f.u32 = static_cast<std::uint32_t>(m.get_u64(f.key));
    } else {
      cfg.*f.f64 = m.get_double(f.key);
    }
  }
  return cfg;
}

std::vector<GenConfig> presets() {
  GenConfig tech;
  tech.name = "tech-100x";
  tech.industries = 1;
  tech.specialties = 4;
  tech.members = 330;
  tech.jobs = 620;
  tech.skills = 270;
  tech.companies = 40;
  tech.schools = 25;
  tech.pairs = 1360;
  tech.connections = 19220;

  GenConfig finance = tech;
  finance.name = "finance-100x";
  finance.specialties = 3;
  finance.members = 200;
  finance.jobs = 270;
  finance.skills = 230;
  finance.companies = 30;
  finance.schools = 20;
  finance.pairs = 360;
  finance.connections = 6150;

  GenConfig hybrid = tech;
  hybrid.name = "hybrid-100x";
  hybrid.industries = 3;
  hybrid.specialties = 2;
  hybrid.members = 830;
  hybrid.jobs = 1200;
  hybrid.skills = 330;
  hybrid.companies = 100;
  hybrid.schools = 60;
  hybrid.pairs = 2000;
  hybrid.connections = 27680;
  hybrid.rho = 0.3;
  return {tech, finance, hybrid};
}

GenConfig preset(const std::string& name) {
  for (auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + name + "' (expected tech-100x, finance-100x or hybrid-100x)");
}

Dataset generate(const GenConfig& cfg) {
  cfg.validate();
  auto data = Generator(cfg).run();
  log::info("synth_generated", {{"name", cfg.name},
                                {"members", cfg.members},
                                {"jobs", cfg.jobs},
                                {"connections", cfg.connections},
                                {"pairs", cfg.pairs}});
  return data;
}

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
  graph::write_tsv(data.store, dir);
  std::string truth;
  auto emit = [&](std::string_view kind, const std::vector<std::uint32_t>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) truth += fmt::format("{}\t{}\t{}\n", kind, i, values[i]);
  };
  emit("member", data.truth.member_pool);
  emit("job", data.truth.job_pool);
  emit("skill", data.truth.skill_pool);
  emit("company", data.truth.company_industry);
  emit("school", data.truth.school_industry);
  binary::write_text(dir / kTruthFile, truth);
  data.config.to_manifest().save(dir / kManifestFile);
}

Truth read_truth(const std::filesystem::path& dir) {
  const auto path = dir / kTruthFile;
  if (!std::filesystem::exists(path)) throw DependencyError("missing " + path.string());
  const std::string text = binary::read_text(path);
  Truth t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw ParseError(path.string(), line_no, "expected 3 fields");
    const auto kind = graph::parse_entity_kind(line.substr(0, t1));
    std::uint32_t id = 0, value = 0;
    const auto id_text = line.substr(t1 + 1, t2 - t1 - 1);
    const auto value_text = line.substr(t2 + 1);
    const bool ok =
        kind && std::from_chars(id_text.data(), id_text.data() + id_text.size(), id).ptr ==
                    id_text.data() + id_text.size() &&
        std::from_chars(value_text.data(), value_text.data() + value_text.size(), value).ptr ==
            value_text.data() + value_text.size() &&
        !id_text.empty() && !value_text.empty();
    if (!ok) throw ParseError(path.string(), line_no, "malformed truth row");
    std::vector<std::uint32_t>* column = nullptr;
    switch (*kind) {
      case EntityKind::member: column = &t.member_pool; break;
      case EntityKind::job: column = &t.job_pool; break;
      case EntityKind::skill: column = &t.skill_pool; break;
      case EntityKind::company: column = &t.company_industry; break;
      case EntityKind::school: column = &t.school_industry; break;
    }
    if (id != column->size()) throw ParseError(path.string(), line_no, "truth ids must be dense and ordered");
    column->push_back(value);
  }
  return t;
}

double latent_cosine(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                     std::span<const std::uint32_t> skill_pool, double pool_affinity) {
  std::uint32_t pools = 0;
  for (auto p : skill_pool) pools = std::max(pools, p + 1);
  const auto pa = make_profile({a.begin(), a.end()}, skill_pool, pools, pool_affinity);
  const auto pb = make_profile({b.begin(), b.end()}, skill_pool, pools, pool_affinity);
  return profile_cosine(pa, pb, pool_affinity);
}

}  // namespace whinpjf::synth
