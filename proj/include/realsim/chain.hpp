#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "realsim/geometry.hpp"

namespace realsim {

using VecX = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

enum class JointKind { Revolute, Prismatic };

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::Revolute;
  Pose origin;                // parent joint frame -> this joint frame
  Vec3 axis = Vec3::UnitZ();  // unit, expressed in this joint frame
  double lower = 0.0;         // rad or m
  double upper = 0.0;
};

/// Ordered serial chain from the base frame to the tool frame.
class ChainSpec {
 public:
  /// Validates: at least one joint, unique names, unit axes, lower <= upper.
  ChainSpec(std::vector<JointSpec> joints, Pose ee_offset);

  const std::vector<JointSpec>& joints() const { return joints_; }
  const Pose& ee_offset() const { return ee_offset_; }
  int size() const { return static_cast<int>(joints_.size()); }

  VecX lower_limits() const;
  VecX upper_limits() const;
  /// Clamps q into the joint limits; returns true if anything changed.
  bool clamp(VecX& q) const;

 private:
  std::vector<JointSpec> joints_;
  Pose ee_offset_;
};

/// Structural equality with a per-element tolerance on poses, axes and limits.
bool approx_equal(const ChainSpec& a, const ChainSpec& b, double tol);

struct FkResult {
  Pose pose;
  bool clamped = false;  // q was outside the limits and has been clamped
};

/// Tool pose = prod_i origin_i * motion_i(q_i) * ee_offset.
FkResult forward_kinematics(const ChainSpec& chain, const VecX& q);
inline Pose fk(const ChainSpec& chain, const VecX& q) { return forward_kinematics(chain, q).pose; }

/// Geometric Jacobian of the tool frame in base coordinates.
/// Rows 0-2 linear velocity, rows 3-5 angular velocity.
Jacobian jacobian(const ChainSpec& chain, const VecX& q);

struct IkSettings {
  double damping = 0.05;  // lambda
  int max_iters = 200;
  double tol_pos = 1e-4;  // m
  double tol_rot = 1e-3;  // rad
  double max_step = 0.2;  // max |dq_i| per iteration

  void validate() const;
};

struct IkResult {
  VecX q;
  double residual_pos = 0.0;
  double residual_rot = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Pose error as a 6-vector: (target.pos - current.pos, rotvec(R_target * R_current^T)).
Eigen::Matrix<double, 6, 1> pose_error(const Pose& target, const Pose& current);

/// Damped least squares: dq = J^T (J J^T + lambda^2 I)^-1 e, step-limited and
/// clamped to joint limits, with lambda = min(damping, |e|). Always returns the
/// best iterate seen.
IkResult ik_dls(const ChainSpec& chain, const Pose& target, const VecX& q_seed, const IkSettings& settings = {});

}  // namespace realsim
