#pragma once

// Independent reference for the jerk-limited planner. Profiles are integrated
// numerically (RK4 per constant-jerk segment) and the optimal duration is found
// by a dense search over the signed peak velocity of the profile family.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "realsim/profile.hpp"

namespace oracle {

struct State {
  double q = 0.0, v = 0.0, a = 0.0;
};

// RK4 on (q, v, a)' = (v, a, jerk) with constant jerk over `duration`.
inline State integrate_segment(State s, double jerk, double duration, int substeps = 4) {
  if (duration <= 0.0) return s;
  const double h = duration / substeps;
  auto f = [jerk](const State& x) { return State{x.v, x.a, jerk}; };
  for (int i = 0; i < substeps; ++i) {
    const State k1 = f(s);
    const State k2 = f({s.q + 0.5 * h * k1.q, s.v + 0.5 * h * k1.v, s.a + 0.5 * h * k1.a});
    const State k3 = f({s.q + 0.5 * h * k2.q, s.v + 0.5 * h * k2.v, s.a + 0.5 * h * k2.a});
    const State k4 = f({s.q + h * k3.q, s.v + h * k3.v, s.a + h * k3.a});
    s.q += h / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
    s.v += h / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
    s.a += h / 6 * (k1.a + 2 * k2.a + 2 * k3.a + k4.a);
  }
  return s;
}

inline State integrate_profile(const realsim::SegmentProfile& p) {
  State s{p.q0(), p.v0(), 0.0};
  for (const auto& seg : p.segments()) s = integrate_segment(s, seg.jerk, seg.duration);
  return s;
}

// Fastest velocity change from rest acceleration back to rest acceleration:
// jerk up, hold the peak acceleration, jerk down. Returns (duration, displacement).
struct Group {
  double duration = 0.0;
  double displacement = 0.0;
};

inline Group velocity_change(double v_from, double v_to, const realsim::LimitSet& lim) {
  const double dv = v_to - v_from;
  if (dv == 0.0) return {};
  const double sign = dv > 0 ? 1.0 : -1.0;
  const double a_peak = std::min(lim.a_max, std::sqrt(std::abs(dv) * lim.j_max));
  const double ramp = a_peak / lim.j_max;
  const double hold = std::max(0.0, std::abs(dv) / a_peak - ramp);
  State s{0.0, v_from, 0.0};
  s = integrate_segment(s, sign * lim.j_max, ramp);
  s = integrate_segment(s, 0.0, hold);
  s = integrate_segment(s, -sign * lim.j_max, ramp);
  return {2 * ramp + hold, s.q};
}

struct Candidate {
  double duration = std::numeric_limits<double>::infinity();
  double peak = 0.0;
};

// Minimum duration over the family {v0 -> vp, cruise at vp, vp -> v_goal}.
inline Candidate min_time(double q0, double v0, double q_goal, double v_goal, const realsim::LimitSet& lim,
                          int grid = 4001) {
  const double dq = q_goal - q0;
  if (dq == 0.0 && v0 == 0.0 && v_goal == 0.0) return {0.0, 0.0};
  auto residual = [&](double vp) {
    return dq - velocity_change(v0, vp, lim).displacement - velocity_change(vp, v_goal, lim).displacement;
  };
  auto time_at = [&](double vp, double r) {
    double cruise = 0.0;
    if (r != 0.0) {
      if (vp == 0.0 || r / vp < 0.0) return std::numeric_limits<double>::infinity();
      cruise = r / vp;
    }
    return velocity_change(v0, vp, lim).duration + velocity_change(vp, v_goal, lim).duration + cruise;
  };

  Candidate best;
  auto consider = [&](double vp, double T) {
    if (T < best.duration) best = {T, vp};
  };
  std::vector<double> vps(static_cast<std::size_t>(grid)), rs(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    vps[i] = -lim.v_max + 2.0 * lim.v_max * i / (grid - 1);
    rs[i] = residual(vps[i]);
    consider(vps[i], time_at(vps[i], rs[i]));
  }
  // Breakpoints where the group shape changes are added so no root hides between them.
  for (double vp : {v0, v_goal}) {
    if (std::abs(vp) <= lim.v_max) consider(vp, time_at(vp, residual(vp)));
  }
  for (int i = 0; i + 1 < grid; ++i) {
    if ((rs[i] < 0) == (rs[i + 1] < 0)) continue;
    double lo = vps[i], hi = vps[i + 1], r_lo = rs[i];
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double r_mid = residual(mid);
      if ((r_mid < 0) == (r_lo < 0)) {
        lo = mid;
        r_lo = r_mid;
      } else {
        hi = mid;
      }
    }
    const double vp = 0.5 * (lo + hi);
    // Cruise is zero at a root, up to the bisection tolerance.
    consider(vp, velocity_change(v0, vp, lim).duration + velocity_change(vp, v_goal, lim).duration);
  }
  return best;
}

// Lower bounds on a rest-to-rest move of |dq|.
inline double rest_to_rest_lower_bound(double dq, const realsim::LimitSet& lim) {
  const double d = std::abs(dq);
  return std::max({d / lim.v_max, 2.0 * std::sqrt(d / lim.a_max), std::cbrt(32.0 * d / lim.j_max)});
}

}  // namespace oracle
