#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semvox/geometry.hpp"
#include "semvox/semantic_types.hpp"
#include "semvox/sim/scene.hpp"

namespace semvox::sim {

using geometry::CameraIntrinsics;
using geometry::Pose;

struct LidarSpec {
  std::string name = "front_lidar";
  int rings = 32;
  int azimuth_steps = 360;
  double min_elevation_deg = -25.0;
  double max_elevation_deg = 15.0;
  /// Horizontal sector; a full turn spaces the steps evenly without
  /// repeating the seam, a partial sector includes both ends.
  double min_azimuth_deg = -180.0;
  double max_azimuth_deg = 180.0;
  double max_range = 50.0;
  /// Standard deviation of additive range noise (meters).
  double range_noise = 0.01;
  double rate_hz = 10.0;
  /// Sensor-to-vehicle transform; the sensor looks along its +x axis.
  Pose mount = Pose::identity("vehicle");

  std::size_t ray_count() const {
    return static_cast<std::size_t>(rings) * static_cast<std::size_t>(azimuth_steps);
  }
  /// Unit direction of ray `ring`, `step` in the sensor frame.
  Vec3 ray_direction(int ring, int step) const;
  void validate() const;
};

struct CameraSpec {
  std::string name;
  CameraIntrinsics intrinsics;
  /// Camera-to-vehicle transform; camera frame is +z forward, +x right, +y down.
  Pose mount = Pose::identity("vehicle");
  double rate_hz = 10.0;

  void validate() const;
};

/// How the stand-in segmenter labels pixels: the true visible class at
/// `confidence` (remaining mass spread evenly), optional Gaussian noise on
/// every entry, and `bleed_px` pixels of dilation of object classes into
/// background classes.
struct OraclePolicy {
  float confidence = 1.0f;
  double noise = 0.0;
  int bleed_px = 0;

  void validate() const;
};

struct StereoSpec {
  /// Name of the camera the stereo pair is attached to.
  std::string camera;
  double max_range = 20.0;
  int stride = 2;
  /// When false, water behaves like any other surface.
  bool water_holes = true;
  double hole_fraction = 0.3;
  double reflect_fraction = 0.0;
  double depth_noise = 0.01;

  void validate() const;
};

struct SensorRig {
  std::vector<LidarSpec> lidars;
  std::vector<CameraSpec> cameras;
  std::optional<StereoSpec> stereo;
  OraclePolicy oracle;
  double map_rate_hz = 5.0;

  /// Front LiDAR, three front cameras, a rear camera and front stereo.
  static SensorRig default_rig();

  /// Throws ConfigurationError naming the offending field.
  void validate() const;
  /// Base clock: least common multiple of all (whole-Hz) rates.
  int base_rate_hz() const;
  const CameraSpec* camera(const std::string& name) const;
};

/// Front-facing camera mount at height `z`, yawed by `yaw_deg` and pitched
/// down by `pitch_down_deg`.
Pose camera_mount(const Vec3& position, double yaw_deg, double pitch_down_deg);

struct LidarScan {
  /// Points in the sensor frame.
  std::vector<Vec3> points;
  std::vector<ClassIndex> truth;
  /// Scene object index per point, -1 for ground.
  std::vector<int> object;
};

/// Casts the ray grid from `sensor_pose_world`. Bushes stop each ray with
/// their hit probability; rays whose first surface is water, or whose return
/// would lie in a pool below its surface, produce no point.
LidarScan raycast_lidar(const Scene& scene, const Pose& sensor_pose_world,
                        const LidarSpec& spec, std::uint64_t seed);

/// Per-pixel true class of the first visible surface (bushes opaque, water
/// labeled at its surface, sky where nothing is hit).
struct ClassImage {
  int width = 0;
  int height = 0;
  std::vector<ClassIndex> labels;

  ClassIndex at(int u, int v) const {
    return labels[static_cast<std::size_t>(v) * width + u];
  }
};

ClassImage render_class_image(const Scene& scene, const Pose& cam_pose_world,
                              const CameraIntrinsics& intr);

/// Dilates object classes into background classes by `radius` pixels
/// (Chebyshev distance; the nearest object pixel wins, first in scan order
/// on ties).
ClassImage bleed(const ClassImage& image, int radius);

bool is_object_class(ClassIndex c);

ConfidenceImage to_confidence(const ClassImage& image, const OraclePolicy& policy,
                              std::size_t num_classes, std::uint64_t seed);

ConfidenceImage render_semantic_image(const Scene& scene, const Pose& cam_pose_world,
                                      const CameraIntrinsics& intr,
                                      const OraclePolicy& policy, std::uint64_t seed);

struct StereoCloud {
  /// World-frame points.
  std::vector<Vec3> points;
  std::vector<ClassIndex> truth;
  std::vector<geometry::PixelIndex> pixels;
  std::vector<bool> reflected;
  /// Water pixels sampled within range before holes were punched.
  std::size_t water_candidates = 0;
};

StereoCloud simulate_stereo(const Scene& scene, const Pose& cam_pose_world,
                            const CameraIntrinsics& intr, const StereoSpec& spec,
                            std::uint64_t seed);

}  // namespace semvox::sim
