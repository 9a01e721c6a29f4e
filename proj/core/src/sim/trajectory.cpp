#include "semvox/sim/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace semvox::sim {

std::string_view to_string(Segment s) {
  switch (s) {
    case Segment::kForward: return "forward";
    case Segment::kReverse: return "reverse";
    case Segment::kDoubleBack: return "double_back";
  }
  return "unknown";
}

std::optional<Segment> parse_segment(std::string_view name) {
  if (name == "forward") return Segment::kForward;
  if (name == "reverse") return Segment::kReverse;
  if (name == "double_back") return Segment::kDoubleBack;
  return std::nullopt;
}

Trajectory::Trajectory(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) throw ConfigurationError("trajectory needs at least one waypoint");
  for (std::size_t i = 0; i < waypoints_.size(); ++i) {
    const Waypoint& w = waypoints_[i];
    if (!std::isfinite(w.t) || !w.position.allFinite() || !std::isfinite(w.yaw_deg)) {
      throw ConfigurationError("trajectory waypoint " + std::to_string(i) +
                               " has a non-finite field");
    }
    if (i > 0 && !(w.t > waypoints_[i - 1].t)) {
      throw ConfigurationError("trajectory timestamps must strictly increase (waypoint " +
                               std::to_string(i) + ")");
    }
  }
}

std::size_t Trajectory::leg(double t) const {
  const auto it = std::upper_bound(waypoints_.begin(), waypoints_.end(), t,
                                   [](double v, const Waypoint& w) { return v < w.t; });
  if (it == waypoints_.begin()) return 0;
  return static_cast<std::size_t>(it - waypoints_.begin()) - 1;
}

geometry::Pose Trajectory::pose_at(double t) const {
  const std::size_t i = leg(t);
  const Waypoint& a = waypoints_[i];
  Vec3 p = a.position;
  double yaw = a.yaw_deg;
  if (t > a.t && i + 1 < waypoints_.size()) {
    const Waypoint& b = waypoints_[i + 1];
    const double s = (t - a.t) / (b.t - a.t);
    p = a.position + s * (b.position - a.position);
    const double dyaw = std::remainder(b.yaw_deg - a.yaw_deg, 360.0);
    yaw = a.yaw_deg + s * dyaw;
  }
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  return geometry::Pose::from_xyz_ypr(p, yaw * kDegToRad, 0.0, 0.0, "world");
}

Segment Trajectory::segment_at(double t) const { return waypoints_[leg(t)].segment; }

}  // namespace semvox::sim
