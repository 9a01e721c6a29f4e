#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "semvox/sim/scene.hpp"
#include "semvox/sim/sensors.hpp"
#include "semvox/sim/trajectory.hpp"

namespace semvox::sim {

/// A canonical scene with the drive and rig it is meant to be run with.
struct Fixture {
  Scene scene;
  Trajectory trajectory;
  SensorRig rig;
};

/// "popup_rock": a rock hidden behind a sparse bush, approached from the
/// side so that it becomes visible partway through the drive.
Fixture popup_rock();
/// popup_rock driven forward, reversed away from the rock, then forward again.
Fixture reverse_doubleback();
/// A vegetation slab over a trail followed by a shallow pool.
Fixture overhang_water();
/// A rock far down a straight drive with heavy label bleeding.
Fixture bleed_at_range();
/// Flat ground, no objects, vehicle parked for one second.
Fixture flat_empty();

const std::vector<std::string>& fixture_names();
/// Throws ConfigurationError for unknown names.
Fixture fixture(std::string_view name);

}  // namespace semvox::sim
