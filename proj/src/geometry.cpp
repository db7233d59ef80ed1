#include "realsim/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "realsim/errors.hpp"

namespace realsim {

namespace {

bool is_rotation(const Mat3& m, double tol) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

}  // namespace

Rot3::Rot3(const Mat3& m) : m_(m) {
  if (!m.allFinite() || !is_rotation(m, kValidationTol)) {
    throw ValidationError("invalid rotation matrix: columns not orthonormal or det != 1");
  }
}

Rot3 Rot3::rot_x(double angle) { return axis_angle(Vec3::UnitX(), angle); }
Rot3 Rot3::rot_y(double angle) { return axis_angle(Vec3::UnitY(), angle); }
Rot3 Rot3::rot_z(double angle) { return axis_angle(Vec3::UnitZ(), angle); }

Rot3 Rot3::axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw ValidationError("axis_angle: zero axis");
  return Rot3(Eigen::AngleAxisd(angle, axis / n).toRotationMatrix(), Unchecked{});
}

Rot3 Rot3::from_rotation_vector(const Vec3& rv) {
  const double angle = rv.norm();
  if (angle == 0.0) return Rot3();
  return Rot3(Eigen::AngleAxisd(angle, rv / angle).toRotationMatrix(), Unchecked{});
}

Rot3 Rot3::from_rpy(double roll, double pitch, double yaw) {
  const Mat3 m = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                  Eigen::AngleAxisd(roll, Vec3::UnitX()))
                     .toRotationMatrix();
  return Rot3(m, Unchecked{});
}

Rot3 Rot3::orthonormalized(const Mat3& m) {
  if (!m.allFinite()) throw ValidationError("orthonormalize: non-finite matrix");
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) <= 1e-9 * std::max(1.0, svd.singularValues()(0))) {
    throw ValidationError("orthonormalize: singular matrix");
  }
  const Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) throw ValidationError("orthonormalize: matrix is a reflection");
  return Rot3(r, Unchecked{});
}

Rot3 Rot3::transpose() const { return Rot3(m_.transpose(), Unchecked{}); }

Rot3 Rot3::operator*(const Rot3& other) const { return Rot3(m_ * other.m_, Unchecked{}); }

Vec3 Rot3::rotation_vector() const {
  const Eigen::AngleAxisd aa(m_);
  return aa.axis() * aa.angle();
}

UnitQuat UnitQuat::make(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!std::isfinite(n) || std::abs(n - 1.0) > kNormTol) {
    throw ValidationError("quaternion is not unit norm (|q| = " + std::to_string(n) + ")");
  }
  const double s = (w < 0.0 ? -1.0 : 1.0) / n;
  return UnitQuat{w * s, x * s, y * s, z * s};
}

Rot3 quat_to_rot(const UnitQuat& q) {
  const Eigen::Quaterniond eq(q.w, q.x, q.y, q.z);
  return Rot3(eq.normalized().toRotationMatrix());
}

UnitQuat rot_to_quat(const Rot3& r) {
  Eigen::Quaterniond q(r.matrix());
  q.normalize();
  return UnitQuat::make(q.w(), q.x(), q.y(), q.z());
}

Pose Pose::from_matrix(const Mat4& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > Rot3::kValidationTol) {
    throw ValidationError("homogeneous matrix has invalid bottom row");
  }
  return Pose{Rot3(Mat3(m.topLeftCorner<3, 3>())), m.topRightCorner<3, 1>()};
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rot.matrix();
  m.topRightCorner<3, 1>() = pos;
  return m;
}

Pose compose(const Pose& a, const Pose& b) { return Pose{a.rot * b.rot, a.rot * b.pos + a.pos}; }

Pose inverse(const Pose& p) {
  const Rot3 rt = p.rot.transpose();
  return Pose{rt, -(rt * p.pos)};
}

double rotation_angle(const Rot3& a, const Rot3& b) {
  const Mat3 rel = a.matrix().transpose() * b.matrix();
  const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  // sin(theta) from the skew part keeps precision near 0 and pi.
  const Vec3 skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  const double s = skew.norm() / 2.0;
  return std::atan2(s, c);
}

double rot_frobenius_loss(const Rot3& a, const Rot3& b) {
  const double arg = (a.matrix() - b.matrix()).norm() / (2.0 * std::sqrt(2.0));
  return std::asin(std::clamp(arg, 0.0, 1.0));
}

}  // namespace realsim
