#pragma once

#include <optional>
#include <vector>

#include "realsim/chain.hpp"
#include "realsim/controller.hpp"

namespace realsim {

/// Per-joint PD gains: stiffness p and damping d.
struct PDParams {
  VecX p;
  VecX d;

  void validate(int n) const;
};

/// Decoupled second-order plant: m * a = p (q* - q) + d (v* - v) - b v.
struct JointDynamics {
  VecX inertia;          // > 0
  VecX passive_damping;  // >= 0
  VecX lower;            // position limits, from the chain
  VecX upper;

  static JointDynamics for_chain(const ChainSpec& chain, const VecX& inertia, const VecX& passive_damping);
  int size() const { return static_cast<int>(inertia.size()); }
  void validate() const;
};

struct JointSimState {
  VecX q;
  VecX v;
};

/// Semi-implicit Euler step; positions are clamped to the limits and the
/// velocity of a clamped joint is zeroed.
JointSimState dyn_step(const JointSimState& s, const VecX& target_q, const VecX& target_v, const PDParams& pd,
                       const JointDynamics& dyn, double dt);

/// Recorded open-loop rollout. ee_poses[i] is the pose before actions[i];
/// the list may carry one extra trailing pose after the last action.
struct TrajectoryRecord {
  std::vector<Action> actions;
  std::vector<Pose> ee_poses;
  std::optional<std::vector<VecX>> joint_positions;
  double ctrl_frequency = 3.0;

  void validate() const;
};

struct ReplayResult {
  std::vector<Pose> poses;            // aligned 1:1 with the reference ee_poses
  std::vector<VecX> joint_positions;  // at every control tick, n_actions + 1 entries
  int ik_failures = 0;
  std::vector<GoogleStep> google_steps;   // filled only when requested
  std::vector<SimTarget> widowx_targets;  // likewise
};

struct ReplayOptions {
  bool keep_controller_steps = false;
};

/// Initial joint configuration for a record: its first joint position if present,
/// otherwise IK onto ee_poses[0] from the mid-range configuration.
VecX initial_configuration(const ChainSpec& chain, const TrajectoryRecord& rec, const IkSettings& ik);

/// Runs the controller open-loop on rec.actions, integrating the plant at cfg.sim_hz
/// (the record's ctrl_frequency sets the control rate), and returns the tool poses
/// at each control tick.
ReplayResult replay_open_loop(const ChainSpec& chain, const JointDynamics& dyn, const PDParams& pd, ControllerKind kind,
                              const TrajectoryRecord& rec, const VecX& q_init, CtrlConfig cfg,
                              const ReplayOptions& opts = {});

/// Rolls out `actions` from q_init and packages the result as a record with
/// n + 1 poses and joint positions; used to build synthetic sysid datasets.
TrajectoryRecord generate_record(const ChainSpec& chain, const JointDynamics& dyn, const PDParams& pd,
                                 ControllerKind kind, const std::vector<Action>& actions, const VecX& q_init,
                                 const CtrlConfig& cfg);

}  // namespace realsim
