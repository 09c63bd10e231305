#include "whinpjf/graph/entity.hpp"

#include <stdexcept>
#include <vector>

#include "whinpjf/common/error.hpp"

namespace whinpjf::graph {
namespace {

constexpr std::array<std::string_view, kEntityKindCount> kKindNames = {"member", "job", "skill",
                                                                       "company", "school"};

constexpr std::array<RelationInfo, kRelationCount> kRelations = {{
    {"connect", EntityKind::member, EntityKind::member, false, true},
    {"apply", EntityKind::member, EntityKind::job, false, false},
    {"master", EntityKind::member, EntityKind::skill, false, false},
    {"work_at", EntityKind::member, EntityKind::company, false, false},
    {"attend", EntityKind::member, EntityKind::school, false, false},
    {"require", EntityKind::job, EntityKind::skill, false, false},
    {"post", EntityKind::job, EntityKind::company, false, false},
    {"co_apply", EntityKind::member, EntityKind::member, true, true},
    {"co_applied", EntityKind::job, EntityKind::job, true, true},
}};

constexpr std::array<Relation, kRelationCount> kAllRelations = {
    Relation::connect, Relation::apply,   Relation::master,   Relation::work_at,
    Relation::attend,  Relation::require, Relation::post,     Relation::co_apply,
    Relation::co_applied};

std::array<RelationView, kViewCount> make_views() {
  std::array<RelationView, kViewCount> views{};
  std::size_t n = 0;
  for (Relation r : kAllRelations) {
    views[n++] = RelationView{r, false};
    if (!kRelations[index_of(r)].symmetric) views[n++] = RelationView{r, true};
  }
  if (n != kViewCount) throw std::logic_error("relation view table size mismatch");
  return views;
}

const std::array<RelationView, kViewCount>& views_table() {
  static const auto views = make_views();
  return views;
}

}  // namespace

std::string_view to_string(EntityKind kind) { return kKindNames[index_of(kind)]; }

std::optional<EntityKind> parse_entity_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<EntityKind>(i);
  }
  return std::nullopt;
}

std::string to_string(EntityRef ref) {
  return std::string(to_string(ref.kind)) + ":" + std::to_string(ref.id);
}

const RelationInfo& info(Relation relation) { return kRelations.at(index_of(relation)); }

std::span<const Relation> all_relations() { return kAllRelations; }

std::span<const Relation> natural_relations() {
  return std::span<const Relation>(kAllRelations).first(kNaturalRelationCount);
}

std::optional<Relation> parse_relation(std::string_view name) {
  for (Relation r : kAllRelations) {
    if (info(r).name == name) return r;
  }
  return std::nullopt;
}

std::span<const RelationView> all_views() { return views_table(); }

std::size_t view_index(RelationView view) {
  const auto& views = views_table();
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i] == view) return i;
  }
  throw ContractError("symmetric relation '" + std::string(info(view.relation).name) +
                      "' has no reverse view");
}

std::string view_name(RelationView view) {
  std::string name(info(view.relation).name);
  if (view.reverse) name += "_rev";
  return name;
}

EntityKind view_source(RelationView view) {
  const auto& i = info(view.relation);
  return view.reverse ? i.destination : i.source;
}

EntityKind view_destination(RelationView view) {
  const auto& i = info(view.relation);
  return view.reverse ? i.source : i.destination;
}

}  // namespace whinpjf::graph
