#include "realsim/controller.hpp"

#include <algorithm>
#include <cmath>

#include "realsim/errors.hpp"

namespace realsim {

CtrlConfig CtrlConfig::widowx_defaults() {
  CtrlConfig c;
  c.sim_hz = 500.0;
  c.ctrl_hz = 5.0;
  return c;
}

CtrlConfig CtrlConfig::defaults_for(ControllerKind kind) {
  return kind == ControllerKind::Google ? google_defaults() : widowx_defaults();
}

int CtrlConfig::sim_steps_per_tick() const { return static_cast<int>(std::floor(sim_hz / ctrl_hz)); }

void CtrlConfig::validate() const {
  if (!(sim_hz > 0.0 && ctrl_hz > 0.0)) throw ValidationError("controller frequencies must be > 0");
  if (sim_steps_per_tick() < 1) throw ValidationError("sim_hz must be at least ctrl_hz");
  if (!(grip_filter_threshold >= 0.0)) throw ValidationError("grip_filter_threshold must be >= 0");
  arm_limits.validate();
  grip_limits.validate();
  ik.validate();
}

GoogleStep google_step(const GoogleCtrlState& state, const Action& action, const SensedState& sensed,
                       const ChainSpec& chain, const CtrlConfig& cfg) {
  const int n = chain.size();
  if (sensed.q_arm.size() != n || sensed.v_arm.size() != n) {
    throw ValidationError("google_step: sensed arm state has wrong dimension");
  }
  if (state.T < 0) throw ValidationError("google_step: negative timestep");

  GoogleStep out;
  out.state = state;
  auto& st = out.state;

  // Arm motion planning.
  const Pose current = fk(chain, sensed.q_arm);
  out.goal = Pose{action.delta_rot * current.rot, action.delta_pos + current.pos};
  out.ik = ik_dls(chain, out.goal, sensed.q_arm, cfg.ik);

  std::vector<DofRequest> arm(n);
  for (int i = 0; i < n; ++i) {
    // Sensed velocities can overshoot the planner's bound slightly under PD tracking.
    const double v0 = std::clamp(sensed.v_arm(i), -cfg.arm_limits.v_max, cfg.arm_limits.v_max);
    arm[i] = DofRequest{sensed.q_arm(i), v0, out.ik.q(i), 0.0, cfg.arm_limits};
  }
  out.arm_plan = synchronize(arm);

  // Gripper motion planning.
  if (st.T == 0) {
    st.q_lastplan_grip = sensed.q_grip;
    st.v_lastplan_grip = 0.0;
    st.q_lastgoal_grip = sensed.q_grip;
  }
  out.grip_goal =
      std::abs(action.gripper) < cfg.grip_filter_threshold ? st.q_lastgoal_grip : st.q_lastplan_grip + action.gripper;
  out.grip_plan =
      synchronize({DofRequest{st.q_lastplan_grip, st.v_lastplan_grip, out.grip_goal, 0.0, cfg.grip_limits}});

  // Execute both plans at every simulation step of this control interval.
  const int steps = cfg.sim_steps_per_tick();
  out.targets.reserve(steps);
  st.q_lastplan.resize(n);
  for (int i = 1; i <= steps; ++i) {
    const double t = i / cfg.sim_hz;
    const auto arm_state = sample(out.arm_plan, t);
    for (int k = 0; k < n; ++k) st.q_lastplan(k) = arm_state[k].q;
    const auto grip_state = sample(out.grip_plan, t).front();
    st.q_lastplan_grip = grip_state.q;
    st.v_lastplan_grip = grip_state.v;
    out.targets.push_back(SimTarget{st.q_lastplan, st.q_lastplan_grip, st.v_lastplan_grip});
  }
  st.q_lastgoal_grip = out.grip_goal;
  st.T += 1;
  return out;
}

Pose widowx_goal_pose(const Pose& current, const Action& action) {
  return Pose{action.delta_rot * current.rot, current.pos + action.delta_pos};
}

WidowXStep widowx_step(const WidowXCtrlState& state, const Action& action, const VecX& q_arm, const ChainSpec& chain,
                       const CtrlConfig& cfg) {
  if (q_arm.size() != chain.size()) throw ValidationError("widowx_step: sensed arm state has wrong dimension");
  if (state.T < 0) throw ValidationError("widowx_step: negative timestep");

  WidowXStep out;
  out.state = state;
  auto& st = out.state;
  if (st.T == 0) st.q_lastgoal = q_arm;
  if (st.q_lastgoal.size() != chain.size()) throw ValidationError("widowx_step: q_lastgoal has wrong dimension");

  out.goal = widowx_goal_pose(fk(chain, st.q_lastgoal), action);
  out.ik = ik_dls(chain, out.goal, q_arm, cfg.ik);
  out.target = SimTarget{out.ik.q, action.gripper, 0.0};
  st.q_lastgoal = out.ik.q;
  st.T += 1;
  return out;
}

}  // namespace realsim
