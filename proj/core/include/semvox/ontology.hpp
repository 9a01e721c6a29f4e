#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semvox/common.hpp"

namespace semvox::semantics {

/// Ordered, duplicate-free list of class names.
class Ontology {
 public:
  Ontology() = default;
  /// Throws ConfigurationError for fewer than two classes, empty or
  /// duplicate names, or more than kMaxClasses entries.
  explicit Ontology(std::vector<std::string> classes);

  /// ground, trail, grass, dry_vegetation, lush_vegetation, trunk, log,
  /// obstacle_rock, water, sky.
  static const Ontology& canonical();
  /// ground, grass, vegetation, obstacle, water, sky.
  static const Ontology& evaluation();
  static const Ontology& yamaha();
  static const Ontology& rellis();
  /// Built-in ontology by name ("canonical", "evaluation", "yamaha", "rellis").
  static std::optional<Ontology> builtin(std::string_view name);

  std::size_t size() const { return classes_.size(); }
  const std::string& name(ClassIndex i) const { return classes_.at(i); }
  const std::vector<std::string>& names() const { return classes_; }
  std::optional<ClassIndex> find(std::string_view name) const;
  /// Like find() but throws ConfigurationError for unknown names.
  ClassIndex index_of(std::string_view name) const;

  friend bool operator==(const Ontology&, const Ontology&) = default;

 private:
  std::vector<std::string> classes_;
};

/// Canonical class indices, valid for Ontology::canonical().
namespace canonical {
inline constexpr ClassIndex kGround = 0;
inline constexpr ClassIndex kTrail = 1;
inline constexpr ClassIndex kGrass = 2;
inline constexpr ClassIndex kDryVegetation = 3;
inline constexpr ClassIndex kLushVegetation = 4;
inline constexpr ClassIndex kTrunk = 5;
inline constexpr ClassIndex kLog = 6;
inline constexpr ClassIndex kObstacleRock = 7;
inline constexpr ClassIndex kWater = 8;
inline constexpr ClassIndex kSky = 9;
}  // namespace canonical

/// Total mapping from every source class onto one target class.
class RemapTable {
 public:
  /// One entry per target class with the source class names folded into it.
  using Grouping = std::vector<std::pair<std::string, std::vector<std::string>>>;

  /// Throws ConfigurationError unless every source class is assigned to
  /// exactly one known target class.
  RemapTable(Ontology source, Ontology target, const Grouping& grouping);

  /// Cross-dataset remaps onto the evaluation ontology.
  static const RemapTable& canonical_to_evaluation();
  static const RemapTable& yamaha_to_evaluation();
  static const RemapTable& rellis_to_evaluation();

  const Ontology& source() const { return source_; }
  const Ontology& target() const { return target_; }
  ClassIndex map(ClassIndex source_class) const {
    return mapping_.at(source_class);
  }
  const std::vector<ClassIndex>& mapping() const { return mapping_; }
  /// Grouping view: target name -> source names, in target order.
  Grouping grouping() const;

 private:
  Ontology source_;
  Ontology target_;
  std::vector<ClassIndex> mapping_;
};

}  // namespace semvox::semantics
