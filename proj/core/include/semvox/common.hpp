#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace semvox {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Index into an Ontology's class list.
using ClassIndex = std::uint8_t;
inline constexpr ClassIndex kMaxClasses = 254;

/// Quiet NaN marks "no measurement" for a class confidence entry.
inline constexpr float kNoMeasurement = std::numeric_limits<float>::quiet_NaN();
inline constexpr float kNoRange = std::numeric_limits<float>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs disagree with each other or with a declared configuration.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A fitted surface failed a physical plausibility gate.
class ImplausibleSurfaceError : public Error {
 public:
  using Error::Error;
};

class InvalidMeasurementError : public Error {
 public:
  using Error::Error;
};

class CorruptMaskError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace semvox
