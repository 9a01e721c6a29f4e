#include "semvox/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

namespace semvox::geometry {
namespace {

constexpr double kRotationTolerance = 1e-9;

void validate_rotation(const Mat3& r) {
  const Mat3 gram = r.transpose() * r;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > kRotationTolerance) {
    throw ConfigurationError("pose rotation is not orthonormal");
  }
  if (std::abs(r.determinant() - 1.0) > kRotationTolerance) {
    throw ConfigurationError("pose rotation determinant is not +1");
  }
}

// Nearest integer with exact halves rounded toward zero.
int round_half_toward_zero(double x) {
  const double lo = std::floor(x);
  const double frac = x - lo;
  if (frac > 0.5) return static_cast<int>(lo) + 1;
  if (frac < 0.5) return static_cast<int>(lo);
  return x >= 0.0 ? static_cast<int>(lo) : static_cast<int>(lo) + 1;
}

}  // namespace

Pose::Pose(const Mat3& r, const Vec3& t, std::string frame)
    : rotation(r), translation(t), frame_id(std::move(frame)) {
  validate_rotation(rotation);
}

Pose Pose::identity(std::string frame_id) {
  return Pose(Mat3::Identity(), Vec3::Zero(), std::move(frame_id));
}

Pose Pose::from_matrix(const Mat4& m, std::string frame_id) {
  const Eigen::RowVector4d last = m.row(3);
  if ((last - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigurationError("transform's last row must be [0 0 0 1]");
  }
  return Pose(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>(),
              std::move(frame_id));
}

Pose Pose::from_xyz_ypr(const Vec3& xyz, double yaw, double pitch,
                        double roll, std::string frame_id) {
  const Mat3 r = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                  Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                  Eigen::AngleAxisd(roll, Vec3::UnitX()))
                     .toRotationMatrix();
  return Pose(r, xyz, std::move(frame_id));
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  inv.frame_id.clear();
  return inv;
}

Pose Pose::operator*(const Pose& child) const {
  Pose out;
  out.rotation = rotation * child.rotation;
  out.translation = rotation * child.translation + translation;
  out.frame_id = frame_id;
  return out;
}

Vec3 transform_point(const Pose& pose, const Vec3& point) {
  return pose.rotation * point + pose.translation;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ConfigurationError("camera focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw ConfigurationError("camera image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw ConfigurationError("principal point lies outside the image");
  }
}

std::optional<Pixel> project_to_image(const CameraIntrinsics& intr,
                                      const Vec3& p) {
  if (!(p.z() > 0.0)) return std::nullopt;
  const Pixel px{intr.fx * p.x() / p.z() + intr.cx,
                 intr.fy * p.y() / p.z() + intr.cy};
  if (!(px.u >= 0.0 && px.u < intr.width && px.v >= 0.0 &&
        px.v < intr.height)) {
    return std::nullopt;
  }
  return px;
}

PixelIndex nearest_pixel(const CameraIntrinsics& intr, const Pixel& px) {
  const int u = round_half_toward_zero(px.u);
  const int v = round_half_toward_zero(px.v);
  return {std::clamp(u, 0, intr.width - 1), std::clamp(v, 0, intr.height - 1)};
}

Vec3 pixel_ray(const CameraIntrinsics& intr, double u, double v) {
  return {(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0};
}

SemanticCloud backproject_cloud(std::span<const Vec3> cloud,
                                const Pose& sensor_pose_world,
                                const Pose& cam_pose_world,
                                const CameraIntrinsics& intr,
                                const ConfidenceImage& sem_image) {
  intr.validate();
  if (sem_image.width() != intr.width || sem_image.height() != intr.height) {
    throw ConfigurationError("semantic image is " +
                             std::to_string(sem_image.width()) + "x" +
                             std::to_string(sem_image.height()) +
                             " but intrinsics declare " +
                             std::to_string(intr.width) + "x" +
                             std::to_string(intr.height));
  }
  if (sensor_pose_world.frame_id != "world" ||
      cam_pose_world.frame_id != "world") {
    throw ConfigurationError("backprojection poses must be in frame 'world'");
  }

  const std::size_t n_cls = sem_image.num_classes();
  const Pose world_to_cam = cam_pose_world.inverse();
  const ClassConfidence none = ClassConfidence::none(n_cls);

  SemanticCloud out(n_cls);
  out.reserve(cloud.size());
  for (const Vec3& p : cloud) {
    const Vec3 world = transform_point(sensor_pose_world, p);
    const Vec3 cam = transform_point(world_to_cam, world);
    // A point exactly at the sensor origin keeps the smallest positive range.
    const float range = std::max(
        static_cast<float>((world - sensor_pose_world.translation).norm()),
        std::numeric_limits<float>::min());
    if (const auto px = project_to_image(intr, cam)) {
      const PixelIndex idx = nearest_pixel(intr, *px);
      out.push_back(world, sem_image.at(idx.u, idx.v), range);
    } else {
      out.push_back(world, none.scores(), range);
    }
  }
  return out;
}

double Plane::height_at(double x, double y) const {
  return (offset - normal.x() * x - normal.y() * y) / normal.z();
}

double Plane::tilt_deg() const {
  return std::acos(std::clamp(normal.z(), -1.0, 1.0)) * 180.0 / M_PI;
}

Plane fit_water_plane(std::span<const Vec3> points,
                      const PlaneFitOptions& options) {
  if (points.size() < std::max<std::size_t>(options.min_points, 3)) {
    throw InsufficientDataError("plane fit needs at least " +
                                std::to_string(options.min_points) +
                                " points, got " +
                                std::to_string(points.size()));
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Mat3 scatter = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - centroid;
    scatter += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> solver(scatter);
  const Vec3 eig = solver.eigenvalues();
  if (!(eig(1) > 1e-12 * std::max(eig(2), 1e-300))) {
    throw InsufficientDataError("plane fit points are collinear");
  }

  Plane plane;
  plane.normal = solver.eigenvectors().col(0).normalized();
  if (plane.normal.z() < 0.0) plane.normal = -plane.normal;
  plane.offset = plane.normal.dot(centroid);
  if (plane.tilt_deg() > options.max_tilt_deg) {
    throw ImplausibleSurfaceError(
        "water plane tilted " + std::to_string(plane.tilt_deg()) +
        " deg, limit " + std::to_string(options.max_tilt_deg));
  }
  return plane;
}

}  // namespace semvox::geometry
