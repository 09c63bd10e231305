#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace whinpjf::graph {

enum class EntityKind : std::uint8_t { member = 0, job, skill, company, school };

inline constexpr std::size_t kEntityKindCount = 5;
inline constexpr std::array<EntityKind, kEntityKindCount> kAllEntityKinds = {
    EntityKind::member, EntityKind::job, EntityKind::skill, EntityKind::company,
    EntityKind::school};

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> parse_entity_kind(std::string_view name);

inline constexpr std::size_t index_of(EntityKind kind) { return static_cast<std::size_t>(kind); }

/// Typed entity identifier; ids are dense per kind.
struct EntityRef {
  EntityKind kind = EntityKind::member;
  std::uint32_t id = 0;

  friend auto operator<=>(const EntityRef&, const EntityRef&) = default;
};

inline EntityRef member(std::uint32_t id) { return {EntityKind::member, id}; }
inline EntityRef job(std::uint32_t id) { return {EntityKind::job, id}; }
inline EntityRef skill(std::uint32_t id) { return {EntityKind::skill, id}; }

std::string to_string(EntityRef ref);

/// The nine relation kinds: seven natural relations plus two metapaths.
enum class Relation : std::uint8_t {
  connect = 0,  // member - member, symmetric
  apply,        // member -> job
  master,       // member -> skill
  work_at,      // member -> company
  attend,       // member -> school
  require,      // job -> skill
  post,         // job -> company
  co_apply,     // member - job - member, symmetric
  co_applied    // job - member - job, symmetric
};

inline constexpr std::size_t kRelationCount = 9;
inline constexpr std::size_t kNaturalRelationCount = 7;

struct RelationInfo {
  std::string_view name;
  EntityKind source;
  EntityKind destination;
  bool metapath;
  bool symmetric;
};

const RelationInfo& info(Relation relation);
std::span<const Relation> all_relations();
std::span<const Relation> natural_relations();
std::optional<Relation> parse_relation(std::string_view name);
inline std::string_view to_string(Relation relation) { return info(relation).name; }
inline constexpr std::size_t index_of(Relation r) { return static_cast<std::size_t>(r); }

/// A direction in which messages travel along a relation. Directed natural
/// relations expose a forward and a reverse view; symmetric relations only a
/// forward view. Each view has its own encoder weights.
struct RelationView {
  Relation relation = Relation::connect;
  bool reverse = false;

  friend bool operator==(const RelationView&, const RelationView&) = default;
};

inline constexpr std::size_t kViewCount = 15;

std::span<const RelationView> all_views();
std::size_t view_index(RelationView view);
std::string view_name(RelationView view);
EntityKind view_source(RelationView view);
EntityKind view_destination(RelationView view);

}  // namespace whinpjf::graph
