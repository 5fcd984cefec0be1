#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace grasp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid transform x -> R*x + t with R a proper rotation.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Vec3 apply_dir(const Vec3& d) const { return rotation * d; }
    RigidTransform inverse() const {
        return {rotation.transpose(), -(rotation.transpose() * translation)};
    }
    RigidTransform compose(const RigidTransform& inner) const {
        return {rotation * inner.rotation, rotation * inner.translation + translation};
    }
};

/// Thrown on malformed inputs and violated preconditions.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown on I/O and parse failures; message carries file/line context.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Rotation about a unit axis by angle (radians).
Mat3 axis_angle_rotation(const Vec3& axis, double angle);

/// Nearest rotation matrix (polar decomposition, det forced to +1).
Mat3 nearest_rotation(const Mat3& m);

/// Angle in radians between two nonzero vectors.
double angle_between(const Vec3& a, const Vec3& b);

/// Writes `data` to `path` atomically (temp file in the same directory, then rename).
void atomic_write_file(const std::string& path, const std::string& data);

std::string read_file(const std::string& path);

}  // namespace grasp
