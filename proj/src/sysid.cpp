#include "realsim/sysid.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <string>

#include "realsim/errors.hpp"

namespace realsim {

TrajectoryLosses trajectory_losses(const std::vector<Pose>& ref, const std::vector<Pose>& sim) {
  if (ref.empty() || sim.empty()) throw ValidationError("trajectory_losses: empty pose sequence");
  if (ref.size() != sim.size()) {
    throw ValidationError("trajectory_losses: length mismatch (" + std::to_string(ref.size()) + " vs " +
                          std::to_string(sim.size()) + ")");
  }
  TrajectoryLosses l;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    l.transl += (ref[i].pos - sim[i].pos).norm();
    l.rot += rot_frobenius_loss(ref[i].rot, sim[i].rot);
  }
  const double inv = 1.0 / static_cast<double>(ref.size());
  l.transl *= inv;
  l.rot *= inv;
  l.total = l.transl + l.rot;
  return l;
}

void SysIdRange::validate(int n) const {
  for (const VecX* v : {&p_low, &p_high, &d_low, &d_high}) {
    if (v->size() != n) throw ValidationError("sysid range: expected " + std::to_string(n) + " entries per bound");
    if (!v->allFinite() || (v->array() < 0.0).any()) throw ValidationError("sysid range: bounds must be >= 0");
  }
  if (!(p_low.array() < p_high.array()).all() || !(d_low.array() < d_high.array()).all()) {
    throw ValidationError("sysid range: degenerate range (low must be < high)");
  }
}

bool SysIdRange::contains(const PDParams& pd) const {
  return (pd.p.array() >= p_low.array()).all() && (pd.p.array() <= p_high.array()).all() &&
         (pd.d.array() >= d_low.array()).all() && (pd.d.array() <= d_high.array()).all();
}

void AnnealConfig::validate() const {
  if (rounds < 1 || iters_per_round < 1) throw ValidationError("anneal: rounds and iters_per_round must be >= 1");
  if (!(t0_factor > 0.0 && sigma > 0.0)) throw ValidationError("anneal: t0_factor and sigma must be > 0");
  if (!(cooling > 0.0 && cooling < 1.0)) throw ValidationError("anneal: cooling must be in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ValidationError("anneal: shrink must be in (0, 1)");
}

SysIdProblem::SysIdProblem(std::vector<TrajectoryRecord> dataset, ChainSpec chain, JointDynamics dynamics,
                           ControllerKind kind, CtrlConfig ctrl)
    : dataset_(std::move(dataset)),
      chain_(std::move(chain)),
      dynamics_(std::move(dynamics)),
      kind_(kind),
      ctrl_(std::move(ctrl)) {
  if (dataset_.empty()) throw ValidationError("sysid: empty dataset");
  dynamics_.validate();
  if (dynamics_.size() != chain_.size()) throw ValidationError("sysid: dynamics size does not match chain");
  initial_q_.reserve(dataset_.size());
  for (std::size_t i = 0; i < dataset_.size(); ++i) {
    try {
      initial_q_.push_back(initial_configuration(chain_, dataset_[i], ctrl_.ik));
    } catch (const ValidationError& e) {
      throw ValidationError("record #" + std::to_string(i) + ": " + e.what());
    }
  }
}

TrajectoryLosses SysIdProblem::record_loss(std::size_t i, const PDParams& pd) const {
  try {
    const auto res = replay_open_loop(chain_, dynamics_, pd, kind_, dataset_[i], initial_q_[i], ctrl_);
    return trajectory_losses(dataset_[i].ee_poses, res.poses);
  } catch (const ValidationError& e) {
    throw ValidationError("record #" + std::to_string(i) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError("record #" + std::to_string(i) + ": " + e.what());
  }
}

namespace {

TrajectoryLosses mean_losses(const std::vector<TrajectoryLosses>& per_record) {
  TrajectoryLosses m;
  for (const auto& l : per_record) {
    m.transl += l.transl;
    m.rot += l.rot;
  }
  const double inv = 1.0 / static_cast<double>(per_record.size());
  m.transl *= inv;
  m.rot *= inv;
  m.total = m.transl + m.rot;
  return m;
}

}  // namespace

TrajectoryLosses dataset_loss_serial(const SysIdProblem& problem, const PDParams& pd) {
  std::vector<TrajectoryLosses> per(problem.dataset().size());
  for (std::size_t i = 0; i < per.size(); ++i) per[i] = problem.record_loss(i, pd);
  return mean_losses(per);
}

TrajectoryLosses dataset_loss(const SysIdProblem& problem, const PDParams& pd) {
  const auto n = static_cast<long>(problem.dataset().size());
  std::vector<TrajectoryLosses> per(static_cast<std::size_t>(n));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    try {
      per[static_cast<std::size_t>(i)] = problem.record_loss(static_cast<std::size_t>(i), pd);
    } catch (...) {
#pragma omp critical(realsim_dataset_loss)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return mean_losses(per);
}

VecX pack_params(const PDParams& pd, bool tied) {
  if (tied) return (VecX(2) << pd.p(0), pd.d(0)).finished();
  VecX theta(pd.p.size() + pd.d.size());
  theta << pd.p, pd.d;
  return theta;
}

PDParams unpack_params(const VecX& theta, int n, bool tied) {
  if (tied) return PDParams{VecX::Constant(n, theta(0)), VecX::Constant(n, theta(1))};
  return PDParams{theta.head(n), theta.tail(n)};
}

VecX normalize(const VecX& theta, const VecX& low, const VecX& high) {
  return ((theta - low).array() / (high - low).array()).matrix();
}

VecX denormalize(const VecX& x, const VecX& low, const VecX& high) {
  return (low.array() + x.array() * (high - low).array()).matrix();
}

namespace {

struct Bounds {
  VecX low;
  VecX high;
};

Bounds packed_bounds(const SysIdRange& r, bool tied) {
  if (tied) {
    auto uniform = [](const VecX& v) { return (v.array() == v(0)).all(); };
    if (!uniform(r.p_low) || !uniform(r.p_high) || !uniform(r.d_low) || !uniform(r.d_high)) {
      throw ValidationError("sysid: tied parameters need identical per-joint bounds");
    }
    return {(VecX(2) << r.p_low(0), r.d_low(0)).finished(), (VecX(2) << r.p_high(0), r.d_high(0)).finished()};
  }
  Bounds b{VecX(2 * r.p_low.size()), VecX(2 * r.p_low.size())};
  b.low << r.p_low, r.d_low;
  b.high << r.p_high, r.d_high;
  return b;
}

SysIdRange range_from_bounds(const Bounds& b, int n, bool tied) {
  if (tied) {
    return {VecX::Constant(n, b.low(0)), VecX::Constant(n, b.high(0)), VecX::Constant(n, b.low(1)),
            VecX::Constant(n, b.high(1))};
  }
  return {b.low.head(n), b.high.head(n), b.low.tail(n), b.high.tail(n)};
}

}  // namespace

SysIdResult anneal_fit(const SysIdProblem& problem, const PDParams& init, const SysIdRange& range0,
                       const AnnealConfig& cfg, const AnnealObserver& observer) {
  const int n = problem.chain().size();
  cfg.validate();
  init.validate(n);
  range0.validate(n);
  if (!range0.contains(init)) throw ValidationError("sysid: initial parameters lie outside the search range");
  if (cfg.tied && ((init.p.array() != init.p(0)).any() || (init.d.array() != init.d(0)).any())) {
    throw ValidationError("sysid: tied mode needs identical initial gains on every joint");
  }

  const Bounds original = packed_bounds(range0, cfg.tied);
  auto objective = [&](const VecX& theta) { return dataset_loss(problem, unpack_params(theta, n, cfg.tied)); };

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SysIdResult result;
  VecX best_theta = pack_params(init, cfg.tied);
  TrajectoryLosses best = objective(best_theta);
  result.initial_loss = best.total;

  Bounds bounds = original;
  for (int round = 0; round < cfg.rounds; ++round) {
    if (round > 0) {
      const VecX width = cfg.shrink * (bounds.high - bounds.low);
      bounds.low = (best_theta - 0.5 * width).cwiseMax(original.low);
      bounds.high = (best_theta + 0.5 * width).cwiseMin(original.high);
    }
    VecX x = normalize(best_theta, bounds.low, bounds.high).cwiseMax(0.0).cwiseMin(1.0);
    const SysIdRange round_range = range_from_bounds(bounds, n, cfg.tied);
    double current = best.total;
    double temperature = cfg.t0_factor * current;
    int evals = 0;
    for (int it = 0; it < cfg.iters_per_round; ++it) {
      VecX proposal = x;
      for (Eigen::Index k = 0; k < proposal.size(); ++k) {
        proposal(k) = std::clamp(proposal(k) + cfg.sigma * gauss(rng), 0.0, 1.0);
      }
      const VecX theta = denormalize(proposal, bounds.low, bounds.high);
      const TrajectoryLosses loss = objective(theta);
      ++evals;
      const double delta = loss.total - current;
      const double u = unit(rng);
      const bool accept = delta <= 0.0 || (temperature > 0.0 && u < std::exp(-delta / temperature));
      if (accept) {
        x = proposal;
        current = loss.total;
      }
      if (loss.total < best.total) {
        best = loss;
        best_theta = theta;
      }
      if (observer) {
        observer(
            AnnealEvent{round, it, unpack_params(theta, n, cfg.tied), loss.total, best.total, accept, &round_range});
      }
      temperature *= cfg.cooling;
    }
    result.history.push_back(RoundHistory{unpack_params(best_theta, n, cfg.tied), best.total, evals, round_range});
  }
  result.best = unpack_params(best_theta, n, cfg.tied);
  result.best_losses = best;
  return result;
}

std::vector<TrajectoryRecord> make_synthetic_dataset(const ChainSpec& chain, const JointDynamics& dyn,
                                                     const PDParams& truth, ControllerKind kind, const CtrlConfig& ctrl,
                                                     const SyntheticSpec& spec) {
  if (spec.records < 1 || spec.actions_per_record < 1) throw ValidationError("synthetic dataset: counts must be >= 1");
  truth.validate(chain.size());
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const VecX lo = chain.lower_limits(), hi = chain.upper_limits();
  const VecX mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);

  std::vector<TrajectoryRecord> out;
  for (int r = 0; r < spec.records; ++r) {
    VecX q0(chain.size());
    for (int j = 0; j < chain.size(); ++j) q0(j) = mid(j) + spec.start_spread * half(j) * sym(rng);
    std::vector<Action> actions(static_cast<std::size_t>(spec.actions_per_record));
    for (auto& a : actions) {
      a.delta_pos = Vec3(sym(rng), sym(rng), sym(rng)) * spec.max_translation;
      a.delta_rot = Rot3::from_rotation_vector(Vec3(sym(rng), sym(rng), sym(rng)) * spec.max_rotation);
    }
    out.push_back(generate_record(chain, dyn, truth, kind, actions, q0, ctrl));
  }
  return out;
}

}  // namespace realsim
