#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "realsim/chain.hpp"
#include "realsim/jointsim.hpp"

namespace realsim {

struct TrajectoryLosses {
  double transl = 0.0;  // mean position error, m
  double rot = 0.0;     // mean arcsin(||R - R'||_F / (2 sqrt 2)), rad
  double total = 0.0;   // transl + rot
};

/// Translation, rotation and combined losses between a reference and a simulated
/// pose sequence of equal, non-zero length.
TrajectoryLosses trajectory_losses(const std::vector<Pose>& ref, const std::vector<Pose>& sim);

/// Per-joint search bounds for stiffness and damping.
struct SysIdRange {
  VecX p_low, p_high, d_low, d_high;

  void validate(int n) const;
  bool contains(const PDParams& pd) const;
};

struct AnnealConfig {
  int rounds = 3;
  int iters_per_round = 300;
  double t0_factor = 0.1;  // T0 = t0_factor * loss at the round's start point
  double cooling = 0.985;  // geometric, per iteration
  double sigma = 0.1;      // proposal std-dev in normalized coordinates
  double shrink = 0.5;     // range width multiplier between rounds
  std::uint64_t seed = 0;
  bool tied = false;  // one shared (p, d) pair for all joints

  void validate() const;
};

/// Dataset, plant and controller behind the sysid objective. Initial joint
/// configurations are resolved once at construction.
class SysIdProblem {
 public:
  SysIdProblem(std::vector<TrajectoryRecord> dataset, ChainSpec chain, JointDynamics dynamics, ControllerKind kind,
               CtrlConfig ctrl);

  const std::vector<TrajectoryRecord>& dataset() const { return dataset_; }
  const std::vector<VecX>& initial_q() const { return initial_q_; }
  const ChainSpec& chain() const { return chain_; }
  const JointDynamics& dynamics() const { return dynamics_; }
  ControllerKind kind() const { return kind_; }
  const CtrlConfig& ctrl() const { return ctrl_; }

  /// L_sysid of one record; failures are rethrown naming the record index.
  TrajectoryLosses record_loss(std::size_t i, const PDParams& pd) const;

 private:
  std::vector<TrajectoryRecord> dataset_;
  ChainSpec chain_;
  JointDynamics dynamics_;
  ControllerKind kind_;
  CtrlConfig ctrl_;
  std::vector<VecX> initial_q_;
};

/// Mean L_sysid over the dataset. Records are replayed in parallel (OpenMP) and the
/// per-record losses are reduced in dataset order, so the result is bit-identical
/// to dataset_loss_serial.
TrajectoryLosses dataset_loss(const SysIdProblem& problem, const PDParams& pd);
TrajectoryLosses dataset_loss_serial(const SysIdProblem& problem, const PDParams& pd);

struct RoundHistory {
  PDParams best;
  double best_loss = 0.0;
  int evals = 0;
  SysIdRange range;
};

struct SysIdResult {
  PDParams best;
  TrajectoryLosses best_losses;
  double initial_loss = 0.0;
  std::vector<RoundHistory> history;
};

/// Packs gains into the optimizer's parameter vector and back. With `tied`, the
/// vector is (p, d) shared across joints.
VecX pack_params(const PDParams& pd, bool tied);
PDParams unpack_params(const VecX& theta, int n_joints, bool tied);

/// Maps absolute parameters into [0, 1] relative to (low, high) and back.
VecX normalize(const VecX& theta, const VecX& low, const VecX& high);
VecX denormalize(const VecX& x, const VecX& low, const VecX& high);

/// One annealing iteration, reported to an optional observer.
struct AnnealEvent {
  int round = 0;
  int iteration = 0;
  PDParams proposal;
  double loss = 0.0;
  double best_loss = 0.0;  // incumbent after this iteration
  bool accepted = false;
  const SysIdRange* range = nullptr;  // the round's search range
};
using AnnealObserver = std::function<void(const AnnealEvent&)>;

/// Multi-round simulated annealing on the normalized range; each round restarts
/// from the incumbent with a range recentred on it and shrunk by cfg.shrink.
SysIdResult anneal_fit(const SysIdProblem& problem, const PDParams& init, const SysIdRange& range0,
                       const AnnealConfig& cfg, const AnnealObserver& observer = {});

/// Random small end-effector actions rolled out under known gains.
struct SyntheticSpec {
  int records = 5;
  int actions_per_record = 30;
  double max_translation = 0.03;  // per axis, m
  double max_rotation = 0.08;     // per axis of the rotation vector, rad
  double start_spread = 0.3;      // start q drawn within this fraction of each half-range around mid-range
  std::uint64_t seed = 0;
};

std::vector<TrajectoryRecord> make_synthetic_dataset(const ChainSpec& chain, const JointDynamics& dyn,
                                                     const PDParams& truth, ControllerKind kind, const CtrlConfig& ctrl,
                                                     const SyntheticSpec& spec);

}  // namespace realsim
