#pragma once

#include <array>
#include <vector>

namespace realsim {

/// Velocity, acceleration and jerk bounds for one degree of freedom.
struct LimitSet {
  double v_max = 0.0;
  double a_max = 0.0;
  double j_max = 0.0;

  void validate() const;
};

/// Arm and gripper limits of the reference Google Robot controller.
inline constexpr LimitSet kGoogleArmLimits{1.5, 2.0, 50.0};
inline constexpr LimitSet kGoogleGripperLimits{1.0, 7.0, 50.0};

struct JointState {
  double q = 0.0;
  double v = 0.0;
  double a = 0.0;
};

struct Segment {
  double duration = 0.0;
  double jerk = 0.0;
};

/// Seven-segment jerk-limited profile starting at rest acceleration:
/// jerk ramp, constant acceleration, jerk ramp, cruise, then the mirrored
/// deceleration group. Segments may have zero duration.
class SegmentProfile {
 public:
  SegmentProfile() = default;
  SegmentProfile(double q0, double v0, double q_goal, double v_goal, const std::array<Segment, 7>& segments,
                 double peak_velocity);

  double duration() const { return boundaries_.back(); }
  double peak_velocity() const { return peak_velocity_; }
  const std::array<Segment, 7>& segments() const { return segments_; }
  double q0() const { return q0_; }
  double v0() const { return v0_; }
  double q_goal() const { return q_goal_; }
  double v_goal() const { return v_goal_; }

  /// Piecewise-polynomial evaluation. t <= 0 gives the start state; t >= duration
  /// returns exactly (q_goal, v_goal, 0).
  JointState at(double t) const;

 private:
  double q0_ = 0.0, v0_ = 0.0, q_goal_ = 0.0, v_goal_ = 0.0;
  std::array<Segment, 7> segments_{};
  std::array<double, 8> boundaries_{};
  std::array<JointState, 8> starts_{};
  double peak_velocity_ = 0.0;
};

/// Time-optimal seven-segment profile from (q0, v0, a0 = 0) to (q_goal, v_goal, 0).
/// Throws ValidationError naming the violated bound if |v0| or |v_goal| > v_max.
SegmentProfile plan_scurve_1d(double q0, double v0, double q_goal, double v_goal, const LimitSet& lim);

struct DofRequest {
  double q0 = 0.0;
  double v0 = 0.0;
  double q_goal = 0.0;
  double v_goal = 0.0;
  LimitSet limits;
};

/// Multi-DOF plan: every DOF's optimal profile is slowed by s_d = T_max / T_d >= 1
/// so that all DOFs finish together at `duration`.
struct MotionPlan {
  std::vector<SegmentProfile> profiles;
  std::vector<double> time_scale;
  double duration = 0.0;
};

MotionPlan synchronize(const std::vector<DofRequest>& dofs);

/// Per-DOF state at time t. Beyond `duration` the terminal state is held.
std::vector<JointState> sample(const MotionPlan& plan, double t);

}  // namespace realsim
