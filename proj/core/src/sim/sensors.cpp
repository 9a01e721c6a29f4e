#include "semvox/sim/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Geometry>

namespace semvox::sim {
namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr double kCameraFarPlane = 500.0;

bool whole_hz(double r) { return r > 0.0 && std::abs(r - std::round(r)) < 1e-9; }

void check_rate(double r, const std::string& field) {
  if (!whole_hz(r)) {
    throw ConfigurationError(field + " must be a positive whole number of Hz, got " +
                             std::to_string(r));
  }
}

}  // namespace

Vec3 LidarSpec::ray_direction(int ring, int step) const {
  const double el =
      rings == 1 ? min_elevation_deg
                 : min_elevation_deg +
                       (max_elevation_deg - min_elevation_deg) * ring / (rings - 1);
  const double span = max_azimuth_deg - min_azimuth_deg;
  const bool full_turn = span >= 360.0 - 1e-9;
  const double az = min_azimuth_deg + (full_turn || azimuth_steps == 1
                                           ? span * step / azimuth_steps
                                           : span * step / (azimuth_steps - 1));
  const double ce = std::cos(el * kDegToRad);
  return {ce * std::cos(az * kDegToRad), ce * std::sin(az * kDegToRad),
          std::sin(el * kDegToRad)};
}

void LidarSpec::validate() const {
  if (rings <= 0 || azimuth_steps <= 0) {
    throw ConfigurationError("lidar '" + name + "' ray grid must be non-empty");
  }
  if (!(max_elevation_deg >= min_elevation_deg) || min_elevation_deg < -90.0 ||
      max_elevation_deg > 90.0) {
    throw ConfigurationError("lidar '" + name + "' elevation limits are invalid");
  }
  if (!(max_azimuth_deg > min_azimuth_deg) || max_azimuth_deg - min_azimuth_deg > 360.0) {
    throw ConfigurationError("lidar '" + name + "' azimuth limits are invalid");
  }
  if (!(max_range > 0.0)) {
    throw ConfigurationError("lidar '" + name + "' max_range must be positive");
  }
  if (!(range_noise >= 0.0)) {
    throw ConfigurationError("lidar '" + name + "' range_noise must be non-negative");
  }
  check_rate(rate_hz, "lidar '" + name + "' rate_hz");
}

void CameraSpec::validate() const {
  if (name.empty()) throw ConfigurationError("camera name must not be empty");
  try {
    intrinsics.validate();
  } catch (const ConfigurationError& e) {
    throw ConfigurationError("camera '" + name + "': " + e.what());
  }
  check_rate(rate_hz, "camera '" + name + "' rate_hz");
}

void OraclePolicy::validate() const {
  if (!(confidence >= 0.0f && confidence <= 1.0f)) {
    throw ConfigurationError("oracle confidence must lie in [0,1]");
  }
  if (!(noise >= 0.0)) throw ConfigurationError("oracle noise must be non-negative");
  if (bleed_px < 0) throw ConfigurationError("oracle bleed_px must be non-negative");
}

void StereoSpec::validate() const {
  if (!(max_range > 0.0)) throw ConfigurationError("stereo max_range must be positive");
  if (stride <= 0) throw ConfigurationError("stereo stride must be positive");
  if (!(hole_fraction >= 0.0 && hole_fraction <= 1.0)) {
    throw ConfigurationError("stereo hole_fraction must lie in [0,1]");
  }
  if (!(reflect_fraction >= 0.0 && reflect_fraction <= 1.0 - hole_fraction)) {
    throw ConfigurationError("stereo reflect_fraction must lie in [0, 1 - hole_fraction]");
  }
  if (!(depth_noise >= 0.0)) {
    throw ConfigurationError("stereo depth_noise must be non-negative");
  }
}

Pose camera_mount(const Vec3& position, double yaw_deg, double pitch_down_deg) {
  Mat3 base;
  // Columns: camera x (right), y (down), z (forward) in vehicle axes.
  base << 0, 0, 1,
         -1, 0, 0,
          0, -1, 0;
  const Mat3 r = (Eigen::AngleAxisd(yaw_deg * kDegToRad, Vec3::UnitZ()) *
                  Eigen::AngleAxisd(pitch_down_deg * kDegToRad, Vec3::UnitY()))
                     .toRotationMatrix() *
                 base;
  return Pose(r, position, "vehicle");
}

SensorRig SensorRig::default_rig() {
  SensorRig rig;
  const Vec3 head(0.0, 0.0, 2.0);
  LidarSpec lidar;
  lidar.mount = Pose(Mat3::Identity(), head, "vehicle");
  rig.lidars.push_back(lidar);
  const CameraIntrinsics intr{160.0, 160.0, 160.0, 120.0, 320, 240};
  rig.cameras.push_back({"front_center", intr, camera_mount(head, 0.0, 10.0), 10.0});
  rig.cameras.push_back({"front_left", intr, camera_mount(head, 60.0, 10.0), 10.0});
  rig.cameras.push_back({"front_right", intr, camera_mount(head, -60.0, 10.0), 10.0});
  rig.cameras.push_back({"rear", intr, camera_mount(head, 180.0, 10.0), 2.0});
  StereoSpec stereo;
  stereo.camera = "front_center";
  rig.stereo = stereo;
  return rig;
}

const CameraSpec* SensorRig::camera(const std::string& name) const {
  for (const auto& c : cameras) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void SensorRig::validate() const {
  if (lidars.empty()) throw ConfigurationError("rig needs at least one lidar");
  for (const auto& l : lidars) l.validate();
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    cameras[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (cameras[j].name == cameras[i].name) {
        throw ConfigurationError("duplicate camera name '" + cameras[i].name + "'");
      }
    }
  }
  oracle.validate();
  if (stereo) {
    stereo->validate();
    if (camera(stereo->camera) == nullptr) {
      throw ConfigurationError("stereo camera '" + stereo->camera + "' is not in the rig");
    }
  }
  check_rate(map_rate_hz, "map_rate_hz");
  const int base = base_rate_hz();
  if (base > 1000) throw ConfigurationError("sensor rates need a base clock above 1 kHz");
}

int SensorRig::base_rate_hz() const {
  long long base = 1;
  auto fold = [&base](double r) {
    if (whole_hz(r)) base = std::lcm(base, static_cast<long long>(std::llround(r)));
  };
  for (const auto& l : lidars) fold(l.rate_hz);
  for (const auto& c : cameras) fold(c.rate_hz);
  fold(map_rate_hz);
  return static_cast<int>(std::min<long long>(base, 1'000'000));
}

LidarScan raycast_lidar(const Scene& scene, const Pose& sensor_pose_world,
                        const LidarSpec& spec, std::uint64_t seed) {
  spec.validate();
  LidarScan scan;
  scan.points.reserve(spec.ray_count() / 2);
  scan.truth.reserve(spec.ray_count() / 2);
  scan.object.reserve(spec.ray_count() / 2);
  const Vec3 origin = sensor_pose_world.translation;
  const Mat3& rot = sensor_pose_world.rotation;
  for (int ring = 0; ring < spec.rings; ++ring) {
    for (int step = 0; step < spec.azimuth_steps; ++step) {
      const Vec3 d_sensor = spec.ray_direction(ring, step);
      const Vec3 d_world = rot * d_sensor;
      SplitMix64 rng(stream_seed(
          seed, {static_cast<std::uint64_t>(ring), static_cast<std::uint64_t>(step)}));
      const auto hit = scene.first_surface(origin, d_world, spec.max_range, &rng);
      if (!hit || hit->kind == SurfaceKind::kWater) continue;
      double t = hit->t;
      if (spec.range_noise > 0.0) t += rng.normal(0.0, spec.range_noise);
      if (!(t > 0.0)) continue;
      const Vec3 p_world = origin + t * d_world;
      if (const WaterRegion* w = scene.water_at(p_world.x(), p_world.y());
          w != nullptr && p_world.z() <= w->surface_height) {
        continue;
      }
      scan.points.push_back(t * d_sensor);
      scan.truth.push_back(hit->cls);
      scan.object.push_back(hit->kind == SurfaceKind::kObject ? hit->index : -1);
    }
  }
  return scan;
}

ClassImage render_class_image(const Scene& scene, const Pose& cam_pose_world,
                              const CameraIntrinsics& intr) {
  intr.validate();
  ClassImage img{intr.width, intr.height,
                 std::vector<ClassIndex>(static_cast<std::size_t>(intr.width) * intr.height,
                                         semantics::canonical::kSky)};
  const Vec3 origin = cam_pose_world.translation;
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 d = (cam_pose_world.rotation * geometry::pixel_ray(intr, u, v)).normalized();
      if (const auto hit = scene.first_surface(origin, d, kCameraFarPlane)) {
        img.labels[static_cast<std::size_t>(v) * intr.width + u] = hit->cls;
      }
    }
  }
  return img;
}

bool is_object_class(ClassIndex c) {
  using namespace semantics::canonical;
  return c == kDryVegetation || c == kLushVegetation || c == kTrunk || c == kLog ||
         c == kObstacleRock;
}

ClassImage bleed(const ClassImage& image, int radius) {
  if (radius <= 0) return image;
  ClassImage out = image;
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      if (is_object_class(image.at(u, v))) continue;
      int best_d = radius + 1;
      ClassIndex best = image.at(u, v);
      for (int dv = -radius; dv <= radius; ++dv) {
        const int vv = v + dv;
        if (vv < 0 || vv >= image.height) continue;
        for (int du = -radius; du <= radius; ++du) {
          const int uu = u + du;
          if (uu < 0 || uu >= image.width) continue;
          const ClassIndex c = image.at(uu, vv);
          if (!is_object_class(c)) continue;
          const int d = std::max(std::abs(du), std::abs(dv));
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
      }
      out.labels[static_cast<std::size_t>(v) * image.width + u] = best;
    }
  }
  return out;
}

ConfidenceImage to_confidence(const ClassImage& image, const OraclePolicy& policy,
                              std::size_t num_classes, std::uint64_t seed) {
  ConfidenceImage out(image.width, image.height, num_classes, 0.0f);
  const float rest =
      num_classes > 1 ? (1.0f - policy.confidence) / static_cast<float>(num_classes - 1) : 0.0f;
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      auto px = out.at(u, v);
      std::fill(px.begin(), px.end(), rest);
      px[image.at(u, v)] = policy.confidence;
      if (policy.noise > 0.0) {
        SplitMix64 rng(stream_seed(seed, {static_cast<std::uint64_t>(v) * image.width + u}));
        for (float& c : px) {
          c = std::clamp(static_cast<float>(c + rng.normal(0.0, policy.noise)), 0.0f, 1.0f);
        }
      }
    }
  }
  return out;
}

ConfidenceImage render_semantic_image(const Scene& scene, const Pose& cam_pose_world,
                                      const CameraIntrinsics& intr,
                                      const OraclePolicy& policy, std::uint64_t seed) {
  policy.validate();
  const ClassImage labels = bleed(render_class_image(scene, cam_pose_world, intr),
                                  policy.bleed_px);
  return to_confidence(labels, policy, scene.ontology().size(), seed);
}

StereoCloud simulate_stereo(const Scene& scene, const Pose& cam_pose_world,
                            const CameraIntrinsics& intr, const StereoSpec& spec,
                            std::uint64_t seed) {
  spec.validate();
  intr.validate();
  StereoCloud out;
  const Vec3 origin = cam_pose_world.translation;
  for (int v = 0; v < intr.height; v += spec.stride) {
    for (int u = 0; u < intr.width; u += spec.stride) {
      const Vec3 d = (cam_pose_world.rotation * geometry::pixel_ray(intr, u, v)).normalized();
      const auto hit = scene.first_surface(origin, d, spec.max_range);
      if (!hit) continue;
      SplitMix64 rng(stream_seed(seed, {static_cast<std::uint64_t>(v) * intr.width + u}));
      double t = hit->t;
      bool reflected = false;
      if (hit->kind == SurfaceKind::kWater) ++out.water_candidates;
      if (hit->kind == SurfaceKind::kWater && spec.water_holes) {
        const double r = rng.uniform();
        if (r < spec.hole_fraction) continue;
        if (r < spec.hole_fraction + spec.reflect_fraction) {
          // Mirror image of something above the surface: it appears beyond
          // the surface along the same ray, hence below it.
          t += 0.05 + 2.0 * rng.uniform();
          reflected = true;
        }
      }
      if (spec.depth_noise > 0.0) t += rng.normal(0.0, spec.depth_noise);
      if (!(t > 0.0)) continue;
      out.points.push_back(origin + t * d);
      out.truth.push_back(hit->cls);
      out.pixels.push_back({u, v});
      out.reflected.push_back(reflected);
    }
  }
  return out;
}

}  // namespace semvox::sim
