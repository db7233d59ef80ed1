#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace realsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Proper rotation matrix. Construction validates orthonormality and det = +1
/// to 1e-6; use Rot3::orthonormalized() for noisy parsed data.
class Rot3 {
 public:
  static constexpr double kValidationTol = 1e-6;

  Rot3() : m_(Mat3::Identity()) {}
  explicit Rot3(const Mat3& m);

  static Rot3 identity() { return Rot3(); }
  static Rot3 rot_x(double angle);
  static Rot3 rot_y(double angle);
  static Rot3 rot_z(double angle);
  /// Rotation of `angle` about unit `axis`.
  static Rot3 axis_angle(const Vec3& axis, double angle);
  /// Rotation vector (axis * angle); zero vector maps to identity.
  static Rot3 from_rotation_vector(const Vec3& rv);
  /// URDF convention: Rz(yaw) * Ry(pitch) * Rx(roll).
  static Rot3 from_rpy(double roll, double pitch, double yaw);
  /// Nearest rotation (polar decomposition via SVD). Throws ValidationError
  /// if the input is singular or reflects.
  static Rot3 orthonormalized(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Rot3 transpose() const;
  Rot3 operator*(const Rot3& other) const;
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// Axis * angle with angle in [0, pi].
  Vec3 rotation_vector() const;

 private:
  struct Unchecked {};
  Rot3(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;
};

/// Unit quaternion, canonicalized to w >= 0.
struct UnitQuat {
  static constexpr double kNormTol = 1e-6;

  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  /// Validates |q| = 1 within kNormTol, renormalizes, canonicalizes the sign.
  static UnitQuat make(double w, double x, double y, double z);
};

Rot3 quat_to_rot(const UnitQuat& q);
UnitQuat rot_to_quat(const Rot3& r);

/// Rigid transform: p_world = rot * p_local + pos.
struct Pose {
  Rot3 rot;
  Vec3 pos = Vec3::Zero();

  static Pose identity() { return Pose{}; }
  static Pose translation(const Vec3& t) { return Pose{Rot3(), t}; }
  static Pose from_matrix(const Mat4& m);
  Mat4 matrix() const;
};

/// a then b in homogeneous-matrix order: matrix(a) * matrix(b).
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// Geodesic angle between two rotations, in [0, pi].
double rotation_angle(const Rot3& a, const Rot3& b);

/// arcsin(||a - b||_F / (2 sqrt 2)), argument clamped to [0, 1].
/// Equals rotation_angle(a, b) / 2.
double rot_frobenius_loss(const Rot3& a, const Rot3& b);

}  // namespace realsim
