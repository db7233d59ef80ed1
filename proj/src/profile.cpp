#include "realsim/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "realsim/errors.hpp"

namespace realsim {

namespace {

constexpr int kBisectionMaxIters = 200;
constexpr int kBracketSubdivisions = 16;

// Minimum-time jerk-limited velocity change va -> vb with zero acceleration at both ends.
struct VelocityChange {
  double ramp = 0.0;  // duration of each jerk ramp
  double hold = 0.0;  // duration at constant |a| = a_max
  double sign = 0.0;
  double duration() const { return 2.0 * ramp + hold; }
};

VelocityChange velocity_change(double va, double vb, const LimitSet& lim) {
  const double dv = vb - va;
  VelocityChange vc;
  vc.sign = dv > 0.0 ? 1.0 : (dv < 0.0 ? -1.0 : 0.0);
  const double adv = std::abs(dv);
  if (adv >= lim.a_max * lim.a_max / lim.j_max) {
    vc.ramp = lim.a_max / lim.j_max;
    vc.hold = adv / lim.a_max - vc.ramp;
  } else {
    vc.ramp = std::sqrt(adv / lim.j_max);
  }
  return vc;
}

// Displacement of accelerate-to-vp then decelerate-to-vf with no cruise.
// Each group is point-symmetric in acceleration, so distance = mean velocity * time.
double no_cruise_distance(double v0, double vp, double vf, const LimitSet& lim) {
  return 0.5 * (v0 + vp) * velocity_change(v0, vp, lim).duration() +
         0.5 * (vp + vf) * velocity_change(vp, vf, lim).duration();
}

struct Candidate {
  double peak = 0.0;
  double cruise = 0.0;
  double time = std::numeric_limits<double>::infinity();
};

double total_time(double v0, double vp, double vf, double cruise, const LimitSet& lim) {
  return velocity_change(v0, vp, lim).duration() + cruise + velocity_change(vp, vf, lim).duration();
}

// Real roots of c2 x^2 + c1 x + c0 = 0 (numerically stable form).
std::vector<double> quadratic_roots(double c2, double c1, double c0) {
  if (c2 == 0.0) {
    if (c1 == 0.0) return {};
    return {-c0 / c1};
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return {};
  const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  std::vector<double> r;
  if (q != 0.0) r.push_back(c0 / q);
  r.push_back(q / c2);
  return r;
}

double bisect(double lo, double hi, double f_lo, double v0, double vf, double dq, const LimitSet& lim) {
  for (int i = 0; i < kBisectionMaxIters && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = no_cruise_distance(v0, mid, vf, lim) - dq;
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Peak velocities in [lo, hi] at which the no-cruise profile covers exactly dq.
void no_cruise_roots(double v0, double vf, double dq, const LimitSet& lim, double lo, double hi,
                     std::vector<double>& roots) {
  const double thr = lim.a_max * lim.a_max / lim.j_max;
  const double mid = 0.5 * (lo + hi);
  const bool both_trapezoidal = std::abs(mid - v0) >= thr && std::abs(mid - vf) >= thr;
  if (both_trapezoidal) {
    // Closed form: distance is quadratic in vp on this piece.
    const double s1 = mid > v0 ? 1.0 : -1.0;
    const double s2 = mid > vf ? 1.0 : -1.0;
    const double a = lim.a_max, k = lim.a_max / lim.j_max;
    const double c2 = (s1 + s2) / (2.0 * a);
    const double c1 = k;
    const double c0 = -s1 * v0 * v0 / (2.0 * a) - s2 * vf * vf / (2.0 * a) + 0.5 * k * (v0 + vf) - dq;
    const double slack = 1e-12 * std::max(1.0, hi - lo);
    for (double r : quadratic_roots(c2, c1, c0)) {
      if (r >= lo - slack && r <= hi + slack) roots.push_back(std::clamp(r, lo, hi));
    }
    return;
  }
  // Fallback: scan for sign changes, then bisect each bracket.
  double x_prev = lo;
  double f_prev = no_cruise_distance(v0, lo, vf, lim) - dq;
  if (f_prev == 0.0) roots.push_back(lo);
  for (int i = 1; i <= kBracketSubdivisions; ++i) {
    const double x = i == kBracketSubdivisions ? hi : lo + (hi - lo) * i / kBracketSubdivisions;
    const double f = no_cruise_distance(v0, x, vf, lim) - dq;
    if (f == 0.0) {
      roots.push_back(x);
    } else if (f_prev != 0.0 && (f < 0.0) != (f_prev < 0.0)) {
      roots.push_back(bisect(x_prev, x, f_prev, v0, vf, dq, lim));
    }
    x_prev = x;
    f_prev = f;
  }
}

JointState advance(const JointState& s, double jerk, double tau) {
  return JointState{s.q + s.v * tau + 0.5 * s.a * tau * tau + jerk * tau * tau * tau / 6.0,
                    s.v + s.a * tau + 0.5 * jerk * tau * tau, s.a + jerk * tau};
}

}  // namespace

void LimitSet::validate() const {
  if (!(v_max > 0.0)) throw ValidationError("limit v_max must be > 0");
  if (!(a_max > 0.0)) throw ValidationError("limit a_max must be > 0");
  if (!(j_max > 0.0)) throw ValidationError("limit j_max must be > 0");
}

SegmentProfile::SegmentProfile(double q0, double v0, double q_goal, double v_goal,
                               const std::array<Segment, 7>& segments, double peak_velocity)
    : q0_(q0), v0_(v0), q_goal_(q_goal), v_goal_(v_goal), segments_(segments), peak_velocity_(peak_velocity) {
  starts_[0] = JointState{q0, v0, 0.0};
  boundaries_[0] = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    starts_[i + 1] = advance(starts_[i], segments_[i].jerk, segments_[i].duration);
    boundaries_[i + 1] = boundaries_[i] + segments_[i].duration;
  }
}

JointState SegmentProfile::at(double t) const {
  if (t <= 0.0) return starts_[0];
  if (t >= duration()) return JointState{q_goal_, v_goal_, 0.0};
  const auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), t);
  const auto seg = static_cast<std::size_t>(std::distance(boundaries_.begin(), it) - 1);
  return advance(starts_[seg], segments_[seg].jerk, t - boundaries_[seg]);
}

SegmentProfile plan_scurve_1d(double q0, double v0, double q_goal, double v_goal, const LimitSet& lim) {
  lim.validate();
  if (!std::isfinite(q0) || !std::isfinite(q_goal) || !std::isfinite(v0) || !std::isfinite(v_goal)) {
    throw ValidationError("plan: non-finite start or goal state");
  }
  if (std::abs(v0) > lim.v_max) {
    throw ValidationError("plan: |v0| = " + std::to_string(std::abs(v0)) +
                          " exceeds v_max = " + std::to_string(lim.v_max));
  }
  if (std::abs(v_goal) > lim.v_max) {
    throw ValidationError("plan: |v_goal| = " + std::to_string(std::abs(v_goal)) +
                          " exceeds v_max = " + std::to_string(lim.v_max));
  }

  const double dq = q_goal - q0;
  const double vmax = lim.v_max;
  Candidate best;
  auto consider = [&](double peak, double cruise) {
    const double t = total_time(v0, peak, v_goal, cruise, lim);
    if (t < best.time) best = Candidate{peak, cruise, t};
  };

  // Cruise at +/- v_max when the no-cruise distance falls short.
  const double rest_pos = dq - no_cruise_distance(v0, vmax, v_goal, lim);
  if (rest_pos >= 0.0) consider(vmax, rest_pos / vmax);
  const double rest_neg = dq - no_cruise_distance(v0, -vmax, v_goal, lim);
  if (rest_neg <= 0.0) consider(-vmax, rest_neg / -vmax);

  // No-cruise profiles: distance is smooth between these breakpoints.
  const double thr = lim.a_max * lim.a_max / lim.j_max;
  std::vector<double> knots{-vmax, vmax, v0, v_goal, v0 - thr, v0 + thr, v_goal - thr, v_goal + thr};
  knots.erase(std::remove_if(knots.begin(), knots.end(), [&](double k) { return k < -vmax || k > vmax; }), knots.end());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    no_cruise_roots(v0, v_goal, dq, lim, knots[i], knots[i + 1], roots);
  }
  if (knots.size() == 1 && no_cruise_distance(v0, knots[0], v_goal, lim) == dq) roots.push_back(knots[0]);
  for (double r : roots) consider(r, 0.0);

  if (!std::isfinite(best.time)) throw NumericalError("plan: no feasible seven-segment profile found");

  const auto up = velocity_change(v0, best.peak, lim);
  const auto down = velocity_change(best.peak, v_goal, lim);
  const double j = lim.j_max;
  const std::array<Segment, 7> segs{Segment{up.ramp, up.sign * j},     Segment{up.hold, 0.0},
                                    Segment{up.ramp, -up.sign * j},    Segment{best.cruise, 0.0},
                                    Segment{down.ramp, down.sign * j}, Segment{down.hold, 0.0},
                                    Segment{down.ramp, -down.sign * j}};
  SegmentProfile profile(q0, v0, q_goal, v_goal, segs, best.peak);

  // The integrated end state must land on the goal; sample() then snaps to it.
  const double T = profile.duration();
  if (T > 0.0) {
    JointState end{q0, v0, 0.0};
    for (const auto& s : segs) end = advance(end, s.jerk, s.duration);
    const double scale = std::max(1.0, std::abs(dq));
    if (std::abs(end.q - q_goal) > 1e-7 * scale || std::abs(end.v - v_goal) > 1e-7) {
      throw NumericalError("plan: profile endpoint misses goal by " + std::to_string(end.q - q_goal));
    }
  }
  return profile;
}

MotionPlan synchronize(const std::vector<DofRequest>& dofs) {
  MotionPlan plan;
  plan.profiles.reserve(dofs.size());
  for (const auto& d : dofs) {
    plan.profiles.push_back(plan_scurve_1d(d.q0, d.v0, d.q_goal, d.v_goal, d.limits));
    plan.duration = std::max(plan.duration, plan.profiles.back().duration());
  }
  plan.time_scale.reserve(dofs.size());
  for (const auto& p : plan.profiles) {
    plan.time_scale.push_back(p.duration() > 0.0 ? plan.duration / p.duration() : 1.0);
  }
  return plan;
}

std::vector<JointState> sample(const MotionPlan& plan, double t) {
  std::vector<JointState> out(plan.profiles.size());
  for (std::size_t d = 0; d < plan.profiles.size(); ++d) {
    const double s = plan.time_scale[d];
    const auto& prof = plan.profiles[d];
    // Snap to the terminal state so t = duration hits the goal for every DOF.
    const auto st = prof.at(t >= plan.duration ? prof.duration() : t / s);
    out[d] = JointState{st.q, st.v / s, st.a / (s * s)};
  }
  return out;
}

}  // namespace realsim
