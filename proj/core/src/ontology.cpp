#include "semvox/ontology.hpp"

#include <algorithm>
#include <unordered_set>

namespace semvox::semantics {

Ontology::Ontology(std::vector<std::string> classes)
    : classes_(std::move(classes)) {
  if (classes_.size() < 2) {
    throw ConfigurationError("an ontology needs at least two classes");
  }
  if (classes_.size() > kMaxClasses) {
    throw ConfigurationError("an ontology supports at most " +
                             std::to_string(kMaxClasses) + " classes");
  }
  std::unordered_set<std::string> seen;
  for (const auto& c : classes_) {
    if (c.empty()) throw ConfigurationError("empty class name in ontology");
    if (!seen.insert(c).second) {
      throw ConfigurationError("duplicate class name '" + c + "'");
    }
  }
}

const Ontology& Ontology::canonical() {
  static const Ontology o({"ground", "trail", "grass", "dry_vegetation",
                           "lush_vegetation", "trunk", "log", "obstacle_rock",
                           "water", "sky"});
  return o;
}

const Ontology& Ontology::evaluation() {
  static const Ontology o(
      {"ground", "grass", "vegetation", "obstacle", "water", "sky"});
  return o;
}

const Ontology& Ontology::yamaha() {
  static const Ontology o({"trail", "rough_trail", "grass",
                           "non_traversable_low_vegetation", "high_vegetation",
                           "obstacle", "puddle", "sky"});
  return o;
}

const Ontology& Ontology::rellis() {
  static const Ontology o({"asphalt", "mud", "concrete", "grass", "tree",
                           "bush", "log", "container", "vehicle", "pole",
                           "barrier", "rubble", "fence", "person", "building",
                           "water", "puddle", "sky"});
  return o;
}

std::optional<Ontology> Ontology::builtin(std::string_view name) {
  if (name == "canonical") return canonical();
  if (name == "evaluation") return evaluation();
  if (name == "yamaha") return yamaha();
  if (name == "rellis") return rellis();
  return std::nullopt;
}

std::optional<ClassIndex> Ontology::find(std::string_view name) const {
  const auto it = std::find(classes_.begin(), classes_.end(), name);
  if (it == classes_.end()) return std::nullopt;
  return static_cast<ClassIndex>(it - classes_.begin());
}

ClassIndex Ontology::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw ConfigurationError("unknown class '" + std::string(name) + "'");
}

RemapTable::RemapTable(Ontology source, Ontology target,
                       const Grouping& grouping)
    : source_(std::move(source)), target_(std::move(target)) {
  constexpr ClassIndex kUnassigned = 255;
  mapping_.assign(source_.size(), kUnassigned);
  for (const auto& [target_name, sources] : grouping) {
    const ClassIndex t = target_.index_of(target_name);
    for (const auto& s : sources) {
      const ClassIndex si = source_.index_of(s);
      if (mapping_[si] != kUnassigned) {
        throw ConfigurationError("source class '" + s +
                                 "' is mapped more than once");
      }
      mapping_[si] = t;
    }
  }
  for (std::size_t i = 0; i < mapping_.size(); ++i) {
    if (mapping_[i] == kUnassigned) {
      throw ConfigurationError("source class '" +
                               source_.name(static_cast<ClassIndex>(i)) +
                               "' has no target class");
    }
  }
}

RemapTable::Grouping RemapTable::grouping() const {
  Grouping g;
  for (ClassIndex t = 0; t < target_.size(); ++t) {
    std::vector<std::string> sources;
    for (ClassIndex s = 0; s < source_.size(); ++s) {
      if (mapping_[s] == t) sources.push_back(source_.name(s));
    }
    g.emplace_back(target_.name(t), std::move(sources));
  }
  return g;
}

const RemapTable& RemapTable::canonical_to_evaluation() {
  static const RemapTable t(
      Ontology::canonical(), Ontology::evaluation(),
      {{"ground", {"ground", "trail"}},
       {"grass", {"grass"}},
       {"vegetation", {"trunk", "dry_vegetation", "lush_vegetation"}},
       {"obstacle", {"obstacle_rock", "log"}},
       {"water", {"water"}},
       {"sky", {"sky"}}});
  return t;
}

const RemapTable& RemapTable::yamaha_to_evaluation() {
  static const RemapTable t(
      Ontology::yamaha(), Ontology::evaluation(),
      {{"ground", {"trail", "rough_trail"}},
       {"grass", {"grass", "non_traversable_low_vegetation"}},
       {"vegetation", {"high_vegetation"}},
       {"obstacle", {"obstacle"}},
       {"water", {"puddle"}},
       {"sky", {"sky"}}});
  return t;
}

const RemapTable& RemapTable::rellis_to_evaluation() {
  static const RemapTable t(
      Ontology::rellis(), Ontology::evaluation(),
      {{"ground", {"asphalt", "mud", "concrete"}},
       {"grass", {"grass"}},
       {"vegetation", {"tree", "bush"}},
       {"obstacle", {"log", "container", "vehicle", "pole", "barrier",
                     "rubble", "fence", "person", "building"}},
       {"water", {"water", "puddle"}},
       {"sky", {"sky"}}});
  return t;
}

}  // namespace semvox::semantics
