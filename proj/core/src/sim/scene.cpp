#include "semvox/sim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semvox::sim {
namespace {

constexpr double kRayEpsilon = 1e-9;

bool on_segment(const Vec2& a, const Vec2& b, double x, double y) {
  const double cross = (b.x() - a.x()) * (y - a.y()) - (b.y() - a.y()) * (x - a.x());
  const double len = (b - a).norm();
  if (std::abs(cross) > 1e-12 * std::max(1.0, len)) return false;
  return x >= std::min(a.x(), b.x()) - 1e-12 && x <= std::max(a.x(), b.x()) + 1e-12 &&
         y >= std::min(a.y(), b.y()) - 1e-12 && y <= std::max(a.y(), b.y()) + 1e-12;
}

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return on_segment(q1, q2, p1.x(), p1.y()) || on_segment(q1, q2, p2.x(), p2.y()) ||
         on_segment(p1, p2, q1.x(), q1.y()) || on_segment(p1, p2, q2.x(), q2.y());
}

void check_class(ClassIndex c, const std::string& what) {
  if (c >= semantics::Ontology::canonical().size()) {
    throw ConfigurationError(what + " has a class outside the ontology");
  }
}

}  // namespace

bool Aabb::contains(const Vec3& p, double eps) const {
  return (p.array() >= min.array() - eps).all() && (p.array() <= max.array() + eps).all();
}

bool Aabb::overlaps(const Aabb& o, double eps) const {
  return (min.array() <= o.max.array() + eps).all() &&
         (o.min.array() <= max.array() + eps).all();
}

std::optional<std::pair<double, double>> Aabb::intersect(const Vec3& origin,
                                                         const Vec3& dir) const {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-300) {
      if (origin[a] < min[a] || origin[a] > max[a]) return std::nullopt;
      continue;
    }
    const double inv = 1.0 / dir[a];
    double lo = (min[a] - origin[a]) * inv;
    double hi = (max[a] - origin[a]) * inv;
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return std::nullopt;
  }
  if (t1 < 0.0) return std::nullopt;
  return std::make_pair(t0, t1);
}

bool Polygon2::contains(double x, double y) const {
  const std::size_t n = vertices.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[j];
    if (on_segment(a, b, x, y)) return true;
    if ((a.y() > y) != (b.y() > y)) {
      const double xc = a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x < xc) inside = !inside;
    }
  }
  return inside;
}

bool Polygon2::contains_rect(const Vec2& lo, const Vec2& hi) const {
  if (!contains(lo.x(), lo.y()) || !contains(hi.x(), lo.y()) ||
      !contains(lo.x(), hi.y()) || !contains(hi.x(), hi.y())) {
    return false;
  }
  for (const Vec2& v : vertices) {
    if (v.x() > lo.x() && v.x() < hi.x() && v.y() > lo.y() && v.y() < hi.y()) {
      return false;
    }
  }
  return true;
}

bool Polygon2::overlaps_rect(const Vec2& lo, const Vec2& hi) const {
  const Vec2 corners[4] = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
  for (const Vec2& c : corners) {
    if (contains(c.x(), c.y())) return true;
  }
  for (const Vec2& v : vertices) {
    if (v.x() >= lo.x() && v.x() <= hi.x() && v.y() >= lo.y() && v.y() <= hi.y()) {
      return true;
    }
  }
  const std::size_t n = vertices.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    for (int k = 0; k < 4; ++k) {
      if (segments_intersect(vertices[j], vertices[i], corners[k], corners[(k + 1) % 4])) {
        return true;
      }
    }
  }
  return false;
}

Vec2 Polygon2::bbox_min() const {
  Vec2 m = vertices.front();
  for (const Vec2& v : vertices) m = m.cwiseMin(v);
  return m;
}

Vec2 Polygon2::bbox_max() const {
  Vec2 m = vertices.front();
  for (const Vec2& v : vertices) m = m.cwiseMax(v);
  return m;
}

std::string_view to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::kBox: return "box";
    case ObjectKind::kBush: return "bush";
    case ObjectKind::kSlab: return "slab";
  }
  return "unknown";
}

void Scene::validate() const {
  check_class(ground_class, "ground");
  if (!std::isfinite(ground.base) || !std::isfinite(ground.slope_x) ||
      !std::isfinite(ground.slope_y)) {
    throw ConfigurationError("ground parameters must be finite");
  }
  for (const auto& o : objects) {
    check_class(o.cls, "object '" + o.name + "'");
    if (!((o.box.max.array() > o.box.min.array()).all())) {
      throw ConfigurationError("object '" + o.name + "' has an empty box");
    }
    if (o.kind == ObjectKind::kBush &&
        !(o.hit_probability > 0.0 && o.hit_probability <= 1.0)) {
      throw ConfigurationError("bush '" + o.name + "' hit_probability must lie in (0,1]");
    }
  }
  for (const auto& r : regions) {
    check_class(r.cls, "region '" + r.name + "'");
    if (r.polygon.vertices.size() < 3) {
      throw ConfigurationError("region '" + r.name + "' needs at least 3 vertices");
    }
  }
  for (const auto& w : water) {
    if (w.polygon.vertices.size() < 3) {
      throw ConfigurationError("water '" + w.name + "' needs at least 3 vertices");
    }
    if (!std::isfinite(w.surface_height)) {
      throw ConfigurationError("water '" + w.name + "' surface height must be finite");
    }
  }
}

ClassIndex Scene::ground_class_at(double x, double y) const {
  ClassIndex c = ground_class;
  for (const auto& r : regions) {
    if (r.polygon.contains(x, y)) c = r.cls;
  }
  return c;
}

const WaterRegion* Scene::water_at(double x, double y) const {
  for (const auto& w : water) {
    if (w.polygon.contains(x, y)) return &w;
  }
  return nullptr;
}

std::optional<SurfaceHit> Scene::first_surface(const Vec3& origin, const Vec3& dir,
                                               double max_t,
                                               SplitMix64* bush_rng) const {
  std::optional<SurfaceHit> best;
  double limit = max_t;

  const double denom = dir.z() - ground.slope_x * dir.x() - ground.slope_y * dir.y();
  if (std::abs(denom) > 1e-300) {
    const double t = (ground.height(origin.x(), origin.y()) - origin.z()) / denom;
    if (t > kRayEpsilon && t <= limit) {
      const Vec3 p = origin + t * dir;
      best = SurfaceHit{t, p, ground_class_at(p.x(), p.y()), SurfaceKind::kGround, -1};
      limit = t;
    }
  }

  if (std::abs(dir.z()) > 1e-300) {
    for (std::size_t i = 0; i < water.size(); ++i) {
      const double t = (water[i].surface_height - origin.z()) / dir.z();
      if (!(t > kRayEpsilon && t < limit)) continue;
      const Vec3 p = origin + t * dir;
      if (!water[i].polygon.contains(p.x(), p.y())) continue;
      best = SurfaceHit{t, p, semantics::canonical::kWater, SurfaceKind::kWater,
                        static_cast<int>(i)};
      limit = t;
    }
  }

  struct Entry {
    double t;
    std::size_t index;
  };
  Entry entries[16];
  std::vector<Entry> many;
  std::size_t count = 0;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto span = objects[i].box.intersect(origin, dir);
    if (!span || span->first <= kRayEpsilon || span->first >= limit) continue;
    const Entry e{span->first, i};
    if (count < 16) {
      entries[count++] = e;
    } else {
      if (many.empty()) many.assign(entries, entries + 16);
      many.push_back(e);
    }
  }
  Entry* first = many.empty() ? entries : many.data();
  Entry* last = many.empty() ? entries + count : many.data() + many.size();
  std::sort(first, last, [](const Entry& a, const Entry& b) {
    return a.t < b.t || (a.t == b.t && a.index < b.index);
  });
  for (Entry* e = first; e != last; ++e) {
    const SceneObject& o = objects[e->index];
    if (o.kind == ObjectKind::kBush && bush_rng != nullptr &&
        !bush_rng->bernoulli(o.hit_probability)) {
      continue;
    }
    return SurfaceHit{e->t, origin + e->t * dir, o.cls, SurfaceKind::kObject,
                      static_cast<int>(e->index)};
  }
  return best;
}

std::optional<std::size_t> Scene::cell_object(const Vec3& lo, const Vec3& hi,
                                              double eps) const {
  const Aabb cell{lo, hi};
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].box.overlaps(cell, eps)) return i;
  }
  return std::nullopt;
}

std::optional<ClassIndex> Scene::cell_class(const Vec3& lo, const Vec3& hi,
                                            double eps) const {
  if (const auto o = cell_object(lo, hi, eps)) return objects[*o].cls;
  const Vec2 lo2(lo.x() - eps, lo.y() - eps);
  const Vec2 hi2(hi.x() + eps, hi.y() + eps);
  for (const auto& w : water) {
    if (w.surface_height >= lo.z() - eps && w.surface_height <= hi.z() + eps &&
        w.polygon.overlaps_rect(lo2, hi2)) {
      return semantics::canonical::kWater;
    }
  }
  const double c[4] = {ground.height(lo.x(), lo.y()), ground.height(hi.x(), lo.y()),
                       ground.height(lo.x(), hi.y()), ground.height(hi.x(), hi.y())};
  const double zmin = *std::min_element(c, c + 4);
  const double zmax = *std::max_element(c, c + 4);
  if (zmax >= lo.z() - eps && zmin <= hi.z() + eps) {
    return ground_class_at(0.5 * (lo.x() + hi.x()), 0.5 * (lo.y() + hi.y()));
  }
  return std::nullopt;
}

}  // namespace semvox::sim
