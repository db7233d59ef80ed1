#include "realsim/chain.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "realsim/errors.hpp"

namespace realsim {

namespace {

void check_size(const ChainSpec& chain, const VecX& q, const char* what) {
  if (q.size() != chain.size()) {
    throw ValidationError(std::string(what) + ": expected " + std::to_string(chain.size()) + " joint values, got " +
                          std::to_string(q.size()));
  }
}

Pose joint_motion(const JointSpec& j, double qi) {
  if (j.kind == JointKind::Revolute) return Pose{Rot3::axis_angle(j.axis, qi), Vec3::Zero()};
  return Pose::translation(j.axis * qi);
}

}  // namespace

ChainSpec::ChainSpec(std::vector<JointSpec> joints, Pose ee_offset)
    : joints_(std::move(joints)), ee_offset_(std::move(ee_offset)) {
  if (joints_.empty()) throw ValidationError("chain has no movable joints");
  std::set<std::string> names;
  for (auto& j : joints_) {
    if (!names.insert(j.name).second) throw ValidationError("duplicate joint name '" + j.name + "'");
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw ValidationError("joint '" + j.name + "': axis is not unit length");
    }
    if (!(j.lower <= j.upper)) throw ValidationError("joint '" + j.name + "': lower limit exceeds upper");
  }
}

VecX ChainSpec::lower_limits() const {
  VecX v(size());
  for (int i = 0; i < size(); ++i) v(i) = joints_[i].lower;
  return v;
}

VecX ChainSpec::upper_limits() const {
  VecX v(size());
  for (int i = 0; i < size(); ++i) v(i) = joints_[i].upper;
  return v;
}

bool ChainSpec::clamp(VecX& q) const {
  bool changed = false;
  for (int i = 0; i < size(); ++i) {
    const double c = std::clamp(q(i), joints_[i].lower, joints_[i].upper);
    if (c != q(i)) {
      q(i) = c;
      changed = true;
    }
  }
  return changed;
}

bool approx_equal(const ChainSpec& a, const ChainSpec& b, double tol) {
  auto pose_eq = [tol](const Pose& x, const Pose& y) {
    return (x.rot.matrix() - y.rot.matrix()).cwiseAbs().maxCoeff() <= tol &&
           (x.pos - y.pos).cwiseAbs().maxCoeff() <= tol;
  };
  if (a.size() != b.size() || !pose_eq(a.ee_offset(), b.ee_offset())) return false;
  for (int i = 0; i < a.size(); ++i) {
    const auto& ja = a.joints()[i];
    const auto& jb = b.joints()[i];
    if (ja.name != jb.name || ja.kind != jb.kind || !pose_eq(ja.origin, jb.origin) ||
        (ja.axis - jb.axis).cwiseAbs().maxCoeff() > tol || std::abs(ja.lower - jb.lower) > tol ||
        std::abs(ja.upper - jb.upper) > tol) {
      return false;
    }
  }
  return true;
}

FkResult forward_kinematics(const ChainSpec& chain, const VecX& q_in) {
  check_size(chain, q_in, "fk");
  VecX q = q_in;
  FkResult out;
  out.clamped = chain.clamp(q);
  Pose t;
  for (int i = 0; i < chain.size(); ++i) {
    const auto& j = chain.joints()[i];
    t = compose(compose(t, j.origin), joint_motion(j, q(i)));
  }
  out.pose = compose(t, chain.ee_offset());
  return out;
}

Jacobian jacobian(const ChainSpec& chain, const VecX& q_in) {
  check_size(chain, q_in, "jacobian");
  VecX q = q_in;
  chain.clamp(q);
  const int n = chain.size();
  std::vector<Vec3> axes(n), origins(n);
  Pose t;
  for (int i = 0; i < n; ++i) {
    const auto& j = chain.joints()[i];
    t = compose(t, j.origin);
    axes[i] = t.rot * j.axis;
    origins[i] = t.pos;
    t = compose(t, joint_motion(j, q(i)));
  }
  const Vec3 tip = compose(t, chain.ee_offset()).pos;

  Jacobian jac(6, n);
  for (int i = 0; i < n; ++i) {
    if (chain.joints()[i].kind == JointKind::Revolute) {
      jac.block<3, 1>(0, i) = axes[i].cross(tip - origins[i]);
      jac.block<3, 1>(3, i) = axes[i];
    } else {
      jac.block<3, 1>(0, i) = axes[i];
      jac.block<3, 1>(3, i).setZero();
    }
  }
  return jac;
}

void IkSettings::validate() const {
  if (!(damping > 0.0 && max_iters > 0 && tol_pos > 0.0 && tol_rot > 0.0 && max_step > 0.0)) {
    throw ValidationError("IK settings must all be strictly positive");
  }
}

Eigen::Matrix<double, 6, 1> pose_error(const Pose& target, const Pose& current) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = target.pos - current.pos;
  e.tail<3>() = (target.rot * current.rot.transpose()).rotation_vector();
  return e;
}

IkResult ik_dls(const ChainSpec& chain, const Pose& target, const VecX& q_seed, const IkSettings& s) {
  check_size(chain, q_seed, "ik");
  s.validate();

  VecX q = q_seed;
  chain.clamp(q);

  IkResult best;
  double best_score = std::numeric_limits<double>::infinity();

  for (int it = 0;; ++it) {
    const auto e = pose_error(target, fk(chain, q));
    const double rp = e.head<3>().norm();
    const double rr = e.tail<3>().norm();
    const bool ok = rp <= s.tol_pos && rr <= s.tol_rot;
    // Mixed-unit score; only used to rank non-converged iterates.
    const double score = rp + rr;
    if (ok || score < best_score) {
      best_score = score;
      best.q = q;
      best.residual_pos = rp;
      best.residual_rot = rr;
      best.converged = ok;
      best.iterations = it;
    }
    if (ok || it >= s.max_iters) break;

    // Damping shrinks with the residual so the last millimetres converge at
    // Gauss-Newton speed even next to a singularity.
    const double lambda = std::min(s.damping, e.norm());
    const Jacobian jac = jacobian(chain, q);
    const Eigen::Matrix<double, 6, 6> jjt =
        jac * jac.transpose() + lambda * lambda * Eigen::Matrix<double, 6, 6>::Identity();
    VecX dq = jac.transpose() * jjt.ldlt().solve(e);
    if (!dq.allFinite()) break;
    const double biggest = dq.cwiseAbs().maxCoeff();
    if (biggest > s.max_step) dq *= s.max_step / biggest;
    q += dq;
    chain.clamp(q);
  }
  return best;
}

}  // namespace realsim
