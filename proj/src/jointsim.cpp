#include "realsim/jointsim.hpp"

#include <string>

#include "realsim/errors.hpp"

namespace realsim {

void PDParams::validate(int n) const {
  if (p.size() != n || d.size() != n) {
    throw ValidationError("PD params: expected " + std::to_string(n) + " stiffness and damping values");
  }
  if (!p.allFinite() || !d.allFinite() || (p.array() < 0.0).any() || (d.array() < 0.0).any()) {
    throw ValidationError("PD params must be finite and non-negative");
  }
}

JointDynamics JointDynamics::for_chain(const ChainSpec& chain, const VecX& inertia, const VecX& passive_damping) {
  JointDynamics dyn{inertia, passive_damping, chain.lower_limits(), chain.upper_limits()};
  dyn.validate();
  if (dyn.size() != chain.size()) throw ValidationError("joint dynamics size does not match chain");
  return dyn;
}

void JointDynamics::validate() const {
  const auto n = inertia.size();
  if (passive_damping.size() != n || lower.size() != n || upper.size() != n) {
    throw ValidationError("joint dynamics vectors have inconsistent sizes");
  }
  if ((inertia.array() <= 0.0).any()) throw ValidationError("joint inertia must be > 0");
  if ((passive_damping.array() < 0.0).any()) throw ValidationError("passive damping must be >= 0");
}

JointSimState dyn_step(const JointSimState& s, const VecX& target_q, const VecX& target_v, const PDParams& pd,
                       const JointDynamics& dyn, double dt) {
  if (!(dt > 0.0)) throw ValidationError("dyn_step: dt must be > 0");
  const auto n = s.q.size();
  JointSimState out{VecX(n), VecX(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double force =
        pd.p(i) * (target_q(i) - s.q(i)) + pd.d(i) * (target_v(i) - s.v(i)) - dyn.passive_damping(i) * s.v(i);
    double v = s.v(i) + force / dyn.inertia(i) * dt;
    double q = s.q(i) + v * dt;
    if (q < dyn.lower(i)) {
      q = dyn.lower(i);
      v = 0.0;
    } else if (q > dyn.upper(i)) {
      q = dyn.upper(i);
      v = 0.0;
    }
    out.q(i) = q;
    out.v(i) = v;
  }
  return out;
}

void TrajectoryRecord::validate() const {
  if (!(ctrl_frequency > 0.0)) throw ValidationError("record: ctrl_frequency must be > 0");
  if (ee_poses.size() != actions.size() && ee_poses.size() != actions.size() + 1) {
    throw ValidationError("record: expected " + std::to_string(actions.size()) + " or " +
                          std::to_string(actions.size() + 1) + " ee_poses, got " + std::to_string(ee_poses.size()));
  }
  if (ee_poses.empty()) throw ValidationError("record: no poses");
  if (joint_positions && joint_positions->empty()) throw ValidationError("record: empty joint_positions");
}

VecX initial_configuration(const ChainSpec& chain, const TrajectoryRecord& rec, const IkSettings& ik) {
  rec.validate();
  if (rec.joint_positions) {
    const VecX& q = rec.joint_positions->front();
    if (q.size() != chain.size()) throw ValidationError("record: joint_positions have wrong dimension");
    return q;
  }
  const VecX mid = 0.5 * (chain.lower_limits() + chain.upper_limits());
  const auto res = ik_dls(chain, rec.ee_poses.front(), mid, ik);
  if (!res.converged) {
    throw ValidationError("record: no joint configuration reaches the first pose (residual " +
                          std::to_string(res.residual_pos) + " m)");
  }
  return res.q;
}

ReplayResult replay_open_loop(const ChainSpec& chain, const JointDynamics& dyn, const PDParams& pd, ControllerKind kind,
                              const TrajectoryRecord& rec, const VecX& q_init, CtrlConfig cfg,
                              const ReplayOptions& opts) {
  rec.validate();
  const int n = chain.size();
  pd.validate(n);
  dyn.validate();
  if (dyn.size() != n) throw ValidationError("replay: dynamics size does not match chain");
  if (q_init.size() != n) throw ValidationError("replay: q_init has wrong dimension");
  cfg.ctrl_hz = rec.ctrl_frequency;
  cfg.validate();

  const double dt = 1.0 / cfg.sim_hz;
  const int steps = cfg.sim_steps_per_tick();
  const VecX zero = VecX::Zero(n);

  ReplayResult out;
  out.poses.reserve(rec.actions.size() + 1);
  out.joint_positions.reserve(rec.actions.size() + 1);

  JointSimState sim{q_init, zero};
  double q_grip = 0.0, v_grip = 0.0;
  out.poses.push_back(fk(chain, sim.q));
  out.joint_positions.push_back(sim.q);

  GoogleCtrlState google;
  WidowXCtrlState widowx;
  for (const Action& action : rec.actions) {
    if (kind == ControllerKind::Google) {
      auto step = google_step(google, action, SensedState{sim.q, sim.v, q_grip, v_grip}, chain, cfg);
      if (!step.ik.converged) ++out.ik_failures;
      for (const auto& target : step.targets) {
        sim = dyn_step(sim, target.arm_q, zero, pd, dyn, dt);
        // Gripper tracks its plan ideally; it does not affect the tool pose.
        q_grip = target.grip_q;
        v_grip = target.grip_v;
      }
      google = step.state;
      if (opts.keep_controller_steps) out.google_steps.push_back(std::move(step));
    } else {
      const auto step = widowx_step(widowx, action, sim.q, chain, cfg);
      if (!step.ik.converged) ++out.ik_failures;
      for (int i = 0; i < steps; ++i) sim = dyn_step(sim, step.target.arm_q, zero, pd, dyn, dt);
      q_grip = step.target.grip_q;
      widowx = step.state;
      if (opts.keep_controller_steps) out.widowx_targets.push_back(step.target);
    }
    out.poses.push_back(fk(chain, sim.q));
    out.joint_positions.push_back(sim.q);
  }
  if (rec.ee_poses.size() == rec.actions.size()) out.poses.pop_back();
  return out;
}

TrajectoryRecord generate_record(const ChainSpec& chain, const JointDynamics& dyn, const PDParams& pd,
                                 ControllerKind kind, const std::vector<Action>& actions, const VecX& q_init,
                                 const CtrlConfig& cfg) {
  TrajectoryRecord rec;
  rec.actions = actions;
  rec.ctrl_frequency = cfg.ctrl_hz;
  rec.ee_poses.assign(actions.size() + 1, fk(chain, q_init));
  const auto res = replay_open_loop(chain, dyn, pd, kind, rec, q_init, cfg);
  rec.ee_poses = res.poses;
  rec.joint_positions = res.joint_positions;
  return rec;
}

}  // namespace realsim
