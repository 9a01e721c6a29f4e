#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semvox/common.hpp"
#include "semvox/ontology.hpp"
#include "semvox/sim/rng.hpp"

namespace semvox::sim {

using Vec2 = Eigen::Vector2d;

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p, double eps = 0.0) const;
  /// Closed-box overlap test with tolerance `eps`.
  bool overlaps(const Aabb& other, double eps = 0.0) const;
  /// Entry and exit parameters of the ray origin + t * dir, t >= 0.
  std::optional<std::pair<double, double>> intersect(const Vec3& origin,
                                                     const Vec3& dir) const;
};

/// Simple polygon in the xy-plane (either winding).
struct Polygon2 {
  std::vector<Vec2> vertices;

  bool contains(double x, double y) const;
  /// True when the closed rectangle [lo, hi] lies entirely inside.
  bool contains_rect(const Vec2& lo, const Vec2& hi) const;
  /// True when the closed rectangle [lo, hi] and the polygon share a point.
  bool overlaps_rect(const Vec2& lo, const Vec2& hi) const;
  Vec2 bbox_min() const;
  Vec2 bbox_max() const;
};

/// Planar ground z = base + slope_x * x + slope_y * y.
struct Ground {
  double base = 0.0;
  double slope_x = 0.0;
  double slope_y = 0.0;

  double height(double x, double y) const { return base + slope_x * x + slope_y * y; }
};

enum class ObjectKind {
  kBox,
  /// Transmissive cluster (bush): each LiDAR ray is stopped with
  /// `hit_probability`; cameras treat it as opaque.
  kBush,
  /// Elevated box (overhang) whose underside sits `clearance` above ground.
  kSlab,
};

std::string_view to_string(ObjectKind k);

struct SceneObject {
  std::string name;
  ObjectKind kind = ObjectKind::kBox;
  Aabb box;
  ClassIndex cls = 0;
  bool hazard = false;
  double hit_probability = 1.0;
};

struct ClassRegion {
  std::string name;
  Polygon2 polygon;
  ClassIndex cls = 0;
};

struct WaterRegion {
  std::string name;
  Polygon2 polygon;
  double surface_height = 0.0;
};

enum class SurfaceKind { kGround, kObject, kWater };

struct SurfaceHit {
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  ClassIndex cls = 0;
  SurfaceKind kind = SurfaceKind::kGround;
  /// Index into Scene::objects or Scene::water; unused for ground.
  int index = -1;
};

/// Synthetic world: planar ground with labeled regions, box-like objects and
/// level water pools. All classes index the canonical ontology.
class Scene {
 public:
  std::string name;
  Ground ground;
  ClassIndex ground_class = semantics::canonical::kGround;
  std::vector<ClassRegion> regions;
  std::vector<SceneObject> objects;
  std::vector<WaterRegion> water;

  const semantics::Ontology& ontology() const { return semantics::Ontology::canonical(); }

  /// Throws ConfigurationError for empty boxes, probabilities outside (0,1]
  /// on bushes, degenerate polygons, or class indices outside the ontology.
  void validate() const;

  /// Class of the ground surface at (x, y); the last matching region wins.
  ClassIndex ground_class_at(double x, double y) const;

  /// Water region whose polygon contains (x, y).
  const WaterRegion* water_at(double x, double y) const;

  /// First surface along the ray within (0, max_t]. Bushes are opaque unless
  /// `bush_rng` is given, in which case each bush stops the ray with its hit
  /// probability (one draw per bush crossed). Water surfaces are reported as
  /// such; callers decide whether they return.
  std::optional<SurfaceHit> first_surface(const Vec3& origin, const Vec3& dir,
                                          double max_t,
                                          SplitMix64* bush_rng = nullptr) const;

  /// Class of the scene surface occupying the closed cell [lo, hi], with
  /// objects taking precedence over water and water over ground; nothing for
  /// free space. `eps` widens the cell to absorb rounding at cell faces.
  std::optional<ClassIndex> cell_class(const Vec3& lo, const Vec3& hi,
                                       double eps = 1e-9) const;
  /// Index of the first object overlapping the cell, if any.
  std::optional<std::size_t> cell_object(const Vec3& lo, const Vec3& hi,
                                         double eps = 1e-9) const;
};

}  // namespace semvox::sim
