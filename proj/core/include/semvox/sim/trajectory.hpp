#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semvox/common.hpp"
#include "semvox/geometry.hpp"

namespace semvox::sim {

enum class Segment { kForward, kReverse, kDoubleBack };

std::string_view to_string(Segment s);
/// Accepts "forward", "reverse", "double_back".
std::optional<Segment> parse_segment(std::string_view name);

struct Waypoint {
  double t = 0.0;
  /// Vehicle origin in the world frame (on the ground).
  Vec3 position = Vec3::Zero();
  double yaw_deg = 0.0;
  /// Tag of the leg that starts at this waypoint.
  Segment segment = Segment::kForward;
};

/// Piecewise-linear vehicle path. Positions interpolate linearly, yaw along
/// the shorter arc; before the first and after the last waypoint the vehicle
/// holds still.
class Trajectory {
 public:
  Trajectory() = default;
  /// Throws ConfigurationError unless there is at least one waypoint and
  /// timestamps strictly increase.
  explicit Trajectory(std::vector<Waypoint> waypoints);

  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  double start_time() const { return waypoints_.front().t; }
  double end_time() const { return waypoints_.back().t; }
  double duration() const { return end_time() - start_time(); }

  geometry::Pose pose_at(double t) const;
  Segment segment_at(double t) const;

 private:
  std::size_t leg(double t) const;

  std::vector<Waypoint> waypoints_;
};

}  // namespace semvox::sim
