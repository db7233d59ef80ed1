#pragma once

#include <vector>

#include "realsim/chain.hpp"
#include "realsim/geometry.hpp"
#include "realsim/profile.hpp"

namespace realsim {

/// End-effector delta action: translation, rotation and gripper command.
struct Action {
  Vec3 delta_pos = Vec3::Zero();
  Rot3 delta_rot;
  double gripper = 0.0;
};

enum class ControllerKind { Google, WidowX };

struct CtrlConfig {
  double sim_hz = 501.0;
  double ctrl_hz = 3.0;
  LimitSet arm_limits = kGoogleArmLimits;
  LimitSet grip_limits = kGoogleGripperLimits;
  double grip_filter_threshold = 0.01;
  IkSettings ik;

  /// 501 Hz simulation, 3 Hz control, arm (1.5, 2.0, 50) and gripper (1.0, 7.0, 50) limits.
  static CtrlConfig google_defaults() { return CtrlConfig{}; }
  /// 500 Hz simulation, 5 Hz control.
  static CtrlConfig widowx_defaults();
  static CtrlConfig defaults_for(ControllerKind kind);

  /// floor(sim_hz / ctrl_hz).
  int sim_steps_per_tick() const;
  void validate() const;
};

/// Joint-space target for one simulation step.
struct SimTarget {
  VecX arm_q;
  double grip_q = 0.0;
  double grip_v = 0.0;
};

struct SensedState {
  VecX q_arm;
  VecX v_arm;
  double q_grip = 0.0;
  double v_grip = 0.0;
};

struct GoogleCtrlState {
  long T = 0;
  double q_lastgoal_grip = 0.0;
  double q_lastplan_grip = 0.0;
  double v_lastplan_grip = 0.0;
  VecX q_lastplan;
};

struct GoogleStep {
  std::vector<SimTarget> targets;  // one per simulation step, t = i / sim_hz
  GoogleCtrlState state;
  IkResult ik;
  Pose goal;
  MotionPlan arm_plan;
  MotionPlan grip_plan;
  double grip_goal = 0.0;
};

/// One control tick of the Google Robot controller: IK to the delta-pose goal,
/// jerk-limited arm and gripper plans, then floor(sim_hz / ctrl_hz) sampled targets.
/// An unconverged IK still yields best-effort targets; check `ik.converged`.
GoogleStep google_step(const GoogleCtrlState& state, const Action& action, const SensedState& sensed,
                       const ChainSpec& chain, const CtrlConfig& cfg);

struct WidowXCtrlState {
  long T = 0;
  VecX q_lastgoal;
};

struct WidowXStep {
  SimTarget target;  // held for the whole control interval
  WidowXCtrlState state;
  IkResult ik;
  Pose goal;
};

/// Goal pose of the WidowX controller: the action's rotation is applied about the
/// current end-effector origin, i.e. (x + x_a, R_a * R).
Pose widowx_goal_pose(const Pose& current, const Action& action);

/// One control tick of the WidowX controller (no intermediate planning).
WidowXStep widowx_step(const WidowXCtrlState& state, const Action& action, const VecX& q_arm, const ChainSpec& chain,
                       const CtrlConfig& cfg);

}  // namespace realsim
