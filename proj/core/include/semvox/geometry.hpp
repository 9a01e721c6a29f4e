#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "semvox/common.hpp"
#include "semvox/semantic_types.hpp"

namespace semvox::geometry {

/// Rigid transform from a child frame into `frame_id`.
struct Pose {
  Pose() = default;
  /// Throws ConfigurationError unless the rotation is orthonormal with
  /// determinant +1 (1e-9 per entry).
  Pose(const Mat3& rotation, const Vec3& translation,
       std::string frame_id = "world");

  static Pose identity(std::string frame_id = "world");
  static Pose from_matrix(const Mat4& m, std::string frame_id = "world");
  /// Z-Y-X Euler angles in radians.
  static Pose from_xyz_ypr(const Vec3& xyz, double yaw, double pitch,
                           double roll, std::string frame_id = "world");

  Mat4 matrix() const;
  /// The inverse maps `frame_id` back into the (untracked) child frame.
  Pose inverse() const;
  Pose operator*(const Pose& child) const;

  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  std::string frame_id = "world";
};

Vec3 transform_point(const Pose& pose, const Vec3& point);

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws ConfigurationError when the invariants do not hold.
  void validate() const;
};

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

struct PixelIndex {
  int u = 0;
  int v = 0;
};

/// Pinhole projection of a camera-frame point (+z forward). Returns nothing
/// for points at or behind the image plane or outside [0,w)x[0,h).
std::optional<Pixel> project_to_image(const CameraIntrinsics& intr,
                                      const Vec3& point_cam);

/// Nearest integer pixel, halves rounded toward zero, clamped to the image.
PixelIndex nearest_pixel(const CameraIntrinsics& intr, const Pixel& px);

/// Camera-frame ray direction (z = 1) through image coordinate (u, v).
Vec3 pixel_ray(const CameraIntrinsics& intr, double u, double v);

/// Transforms sensor-frame points to world, looks up the class confidences of
/// the nearest pixel in `sem_image`, and records each point's distance from
/// the sensor origin. Points without a projection keep the all-NaN vector.
SemanticCloud backproject_cloud(std::span<const Vec3> cloud,
                                const Pose& sensor_pose_world,
                                const Pose& cam_pose_world,
                                const CameraIntrinsics& intr,
                                const ConfidenceImage& sem_image);

/// normal . p = offset for points on the plane; the normal is unit length.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  /// Height of the plane above (x, y); requires a non-horizontal normal.
  double height_at(double x, double y) const;
  double tilt_deg() const;
  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

struct PlaneFitOptions {
  std::size_t min_points = 20;
  double max_tilt_deg = 5.0;
};

/// Total least-squares plane with an upward normal. Throws
/// InsufficientDataError below `min_points` (or for degenerate input) and
/// ImplausibleSurfaceError when the normal is tilted past `max_tilt_deg`.
Plane fit_water_plane(std::span<const Vec3> points,
                      const PlaneFitOptions& options = {});

}  // namespace semvox::geometry
