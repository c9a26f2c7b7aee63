#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace clothsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr const char* kVersion = "0.1.0";

/// Base error; subclasses map to distinct CLI exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeshError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct SimError : Error {
  using Error::Error;
};

struct MetricError : Error {
  using Error::Error;
};

}  // namespace clothsim
