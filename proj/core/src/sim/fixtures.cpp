#include "semvox/sim/fixtures.hpp"

namespace semvox::sim {
namespace {

namespace cls = semantics::canonical;

Polygon2 rect(double x0, double y0, double x1, double y1) {
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

Aabb box(double x0, double y0, double z0, double x1, double y1, double z1) {
  return {Vec3(x0, y0, z0), Vec3(x1, y1, z1)};
}

Waypoint at(double t, double x, double y, Segment s = Segment::kForward) {
  return {t, Vec3(x, y, 0.0), 0.0, s};
}

Scene popup_scene(std::string name) {
  Scene s;
  s.name = std::move(name);
  s.objects.push_back({"bush", ObjectKind::kBush, box(8, -1.2, 0, 9, 1.2, 2.4),
                       cls::kDryVegetation, false, 0.3});
  s.objects.push_back({"rock", ObjectKind::kBox, box(10, -0.6, 0, 11, 0.6, 1),
                       cls::kObstacleRock, true, 1.0});
  return s;
}

}  // namespace

Fixture popup_rock() {
  return {popup_scene("popup_rock"), Trajectory({at(0, 0, 3), at(5, 8, 3)}),
          SensorRig::default_rig()};
}

Fixture reverse_doubleback() {
  return {popup_scene("reverse_doubleback"),
          Trajectory({at(0, 0, 3), at(5, 8, 3, Segment::kReverse),
                      at(12.5, -4, 3, Segment::kDoubleBack), at(20, 8, 3, Segment::kDoubleBack)}),
          SensorRig::default_rig()};
}

Fixture overhang_water() {
  Scene s;
  s.name = "overhang_water";
  s.regions.push_back({"trail", rect(-20, -1.5, 40, 1.5), cls::kTrail});
  s.objects.push_back({"canopy", ObjectKind::kSlab, box(10, -2, 2.4, 12, 2, 3.0),
                       cls::kLushVegetation, false, 1.0});
  s.water.push_back({"pool", rect(18, -1.6, 21, 1.6), 0.1});
  SensorRig rig = SensorRig::default_rig();
  rig.oracle.bleed_px = 1;
  // Front-facing LiDAR inside the sector covered by the front cameras.
  rig.lidars.front().min_azimuth_deg = -100.0;
  rig.lidars.front().max_azimuth_deg = 100.0;
  rig.lidars.front().azimuth_steps = 201;
  return {s, Trajectory({at(0, -6, 0), at(8.8, 16, 0), at(10.8, 16, 0)}), rig};
}

Fixture bleed_at_range() {
  Scene s;
  s.name = "bleed_at_range";
  s.objects.push_back({"rock", ObjectKind::kBox, box(20, -0.6, 0, 21, 0.6, 1),
                       cls::kObstacleRock, true, 1.0});
  SensorRig rig = SensorRig::default_rig();
  rig.oracle.bleed_px = 3;
  return {s, Trajectory({at(0, -10, 0), at(10.4, 16, 0)}), rig};
}

Fixture flat_empty() {
  Scene s;
  s.name = "flat_empty";
  return {s, Trajectory({at(0, 0, 0), at(1, 0, 0)}), SensorRig::default_rig()};
}

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"popup_rock", "reverse_doubleback",
                                                 "overhang_water", "bleed_at_range",
                                                 "flat_empty"};
  return names;
}

Fixture fixture(std::string_view name) {
  if (name == "popup_rock") return popup_rock();
  if (name == "reverse_doubleback") return reverse_doubleback();
  if (name == "overhang_water") return overhang_water();
  if (name == "bleed_at_range") return bleed_at_range();
  if (name == "flat_empty") return flat_empty();
  throw ConfigurationError("unknown fixture '" + std::string(name) + "'");
}

}  // namespace semvox::sim
