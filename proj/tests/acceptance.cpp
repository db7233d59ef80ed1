// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "planner_oracle.hpp"
#include "realsim/chain.hpp"
#include "realsim/controller.hpp"
#include "realsim/geometry.hpp"
#include "realsim/imaging.hpp"
#include "realsim/io.hpp"
#include "realsim/metrics.hpp"
#include "realsim/profile.hpp"
#include "realsim/sysid.hpp"
#include "support.hpp"

using namespace realsim;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a failed check and keeps the first few messages.
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || std::count(detail.begin(), detail.end(), ';') < 3) detail += (detail.empty() ? "" : "; ") + what;
    pass = false;
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<PairedEvalTable> tables(const std::string& file) {
  return io::tables_from_json(io::load_json(testing::data_path(file)));
}

const PairedEvalTable& task(const std::vector<PairedEvalTable>& ts, const std::string& name) {
  for (const auto& t : ts) {
    if (t.task == name) return t;
  }
  throw std::runtime_error("fixture has no task '" + name + "'");
}

std::pair<std::vector<double>, std::vector<double>> columns(const PairedEvalTable& t) {
  std::vector<double> r, s;
  for (const auto& e : t.evals) {
    r.push_back(e.real_rate);
    s.push_back(e.sim_rate);
  }
  return {r, s};
}

ChainSpec arm6() { return io::chain_from_json(io::load_json(testing::data_path("arm6.json"))); }

// ------------------------------------------------------------------ 1-3

Outcome mmrv_reproduction() {
  Outcome o;
  const auto ts = tables("google_robot_vismatch.json");
  const std::vector<std::pair<std::string, double>> expected{{"pick_coke_can_avg", 0.031},
                                                             {"move_near", 0.111},
                                                             {"open_drawer", 0.000},
                                                             {"close_drawer", 0.123},
                                                             {"drawer_avg", 0.055}};
  for (const auto& [name, want] : expected) {
    const double got = mmrv(task(ts, name));
    o.note(name + "=" + fmt("%.4f", got));
    o.expect(std::abs(got - want) <= 0.0015, name + " off by " + fmt("%.4f", got - want));
  }
  return o;
}

Outcome pearson_reproduction() {
  Outcome o;
  const auto [r, s] = columns(task(tables("google_robot_vismatch.json"), "pick_coke_can_avg"));
  const auto coke = pearson(r, s);
  o.expect(coke.has_value() && std::abs(*coke - 0.976) <= 0.005, "pick_coke_can_avg pearson out of tolerance");
  const auto [br, bs] = columns(tables("bridge_stack.json").front());
  const auto bridge = pearson(br, bs);
  o.expect(bridge.has_value() && fmt("%.3f", *bridge) == "1.000" && std::abs(*bridge - 1.0) <= 1e-12,
           "stack_block pearson is not 1.000");
  o.note("pick_coke_can_avg=" + fmt("%.4f", coke.value_or(NAN)) + " stack_block=" + fmt("%.15f", bridge.value_or(NAN)));
  return o;
}

Outcome shift_reproduction() {
  Outcome o;
  const auto entries = io::shifts_from_json(io::load_json(testing::data_path("rt1_shifts.json")));
  auto lookup = [&](const std::string& factor) {
    for (const auto& e : entries) {
      if (e.policy == "rt1_no_aug" && e.task == "pick_coke_can" && e.factor == factor) return delta_success(e.eval);
    }
    throw std::runtime_error("fixture has no row for " + factor);
  };
  for (const auto& [factor, want] : std::vector<std::pair<std::string, double>>{
           {"lighting", 0.040}, {"table_texture", 0.113}, {"camera_pose", 0.753}}) {
    const double got = lookup(factor).abs_per_variant;
    o.note(factor + "=" + fmt("%.4f", got));
    o.expect(std::abs(got - want) <= 0.001, factor + " off by " + fmt("%.4f", got - want));
  }
  const auto bg = lookup("background");
  o.note("background signed=" + fmt("%.4f", bg.signed_mean) + " abs=" + fmt("%.4f", bg.abs_per_variant));
  o.expect(std::abs(bg.signed_mean) <= 0.001, "background signed delta is not 0.000");
  o.expect(std::abs(bg.abs_per_variant - 0.013) <= 0.001, "background absolute delta is not 0.013");
  return o;
}

// ------------------------------------------------------------------ 4-6

Outcome rotation_identity() {
  Outcome o;
  testing::Rng rng(401);
  double worst = 0;
  for (int k = 0; k < 10000; ++k) {
    const Rot3 a = rng.rotation(), b = rng.rotation();
    worst = std::max(worst, std::abs(rot_frobenius_loss(a, b) - rotation_angle(a, b) / 2));
  }
  o.note("max deviation " + fmt("%.2e", worst));
  o.expect(worst <= 1e-9, "identity violated");
  return o;
}

Outcome planner_properties() {
  Outcome o;
  const LimitSet lim = kGoogleArmLimits;
  testing::Rng rng(501);
  double max_v = 0, max_a = 0, max_end = 0, max_oracle = 0, worst_bound = 0;
  for (int k = 0; k < 1000; ++k) {
    const bool rest = k % 2 == 0;
    const double q0 = rng.uniform(-3, 3);
    const double qg = q0 + (rng.uniform(0, 1) < 0.2 ? rng.uniform(-0.02, 0.02) : rng.uniform(-4, 4));
    const double v0 = rest ? 0.0 : rng.uniform(-lim.v_max, lim.v_max);
    const double vg = rest ? 0.0 : rng.uniform(-lim.v_max, lim.v_max);
    const auto p = plan_scurve_1d(q0, v0, qg, vg, lim);

    const int n = static_cast<int>(std::ceil(p.duration() * 2000.0)) + 1;
    for (int i = 0; i <= n; ++i) {
      const JointState s = p.at(p.duration() * i / n);
      max_v = std::max(max_v, std::abs(s.v));
      max_a = std::max(max_a, std::abs(s.a));
    }
    const auto end = oracle::integrate_profile(p);
    max_end = std::max({max_end, std::abs(end.q - qg), std::abs(end.v - vg)});

    double bound = std::abs(qg - q0) / lim.v_max;
    if (rest) bound = oracle::rest_to_rest_lower_bound(qg - q0, lim);
    worst_bound = std::max(worst_bound, bound - p.duration());
    max_oracle = std::max(max_oracle, std::abs(p.duration() - oracle::min_time(q0, v0, qg, vg, lim).duration));
  }
  o.note("max|v|=" + fmt("%.9f", max_v) + " max|a|=" + fmt("%.9f", max_a) + " endpoint=" + fmt("%.1e", max_end) +
         " oracle gap=" + fmt("%.1e", max_oracle));
  o.expect(max_v <= lim.v_max * (1 + 1e-6), "velocity limit exceeded");
  o.expect(max_a <= lim.a_max * (1 + 1e-6), "acceleration limit exceeded");
  o.expect(max_end <= 1e-6, "endpoint error above 1e-6");
  o.expect(worst_bound <= 1e-12, "duration below an analytic lower bound");
  o.expect(max_oracle <= 1e-4, "duration differs from the integration oracle");
  return o;
}

Outcome controller_fidelity() {
  Outcome o;
  const ChainSpec chain = arm6();
  const auto cfg = CtrlConfig::google_defaults();
  testing::Rng rng(601);
  const VecX mid = 0.5 * (chain.lower_limits() + chain.upper_limits());
  GoogleCtrlState st;
  for (int k = 0; k < 20; ++k) {
    Action a;
    a.delta_pos = rng.vec3(0.02);
    a.delta_rot = Rot3::from_rotation_vector(rng.vec3(0.05));
    a.gripper = rng.uniform(-0.2, 0.2);
    const auto sensed = SensedState{testing::random_q(rng, chain, 0.5), VecX::Zero(chain.size()), 0.5, 0.0};
    const auto step = google_step(st, a, sensed, chain, cfg);
    o.expect(step.targets.size() == 167, "tick produced " + std::to_string(step.targets.size()) + " targets");
    st = step.state;
  }
  for (int k = 0; k < 200; ++k) {
    GoogleCtrlState s;
    s.T = rng.integer(1, 50);
    s.q_lastgoal_grip = rng.uniform(0, 1);
    s.q_lastplan_grip = rng.uniform(0, 1);
    Action a;
    a.gripper = rng.uniform(-0.00999, 0.00999);
    const auto step = google_step(s, a, SensedState{mid, VecX::Zero(chain.size()), rng.uniform(0, 1), 0.0}, chain, cfg);
    o.expect(step.grip_goal == s.q_lastgoal_grip && step.state.q_lastgoal_grip == s.q_lastgoal_grip,
             "filtered gripper action changed the goal");
  }
  auto S = [](const Vec3& x, const Rot3& r) { return Pose{r, x}.matrix(); };
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const Pose cur = rng.pose();
    Action a;
    a.delta_pos = rng.vec3(0.1);
    a.delta_rot = rng.rotation();
    const Mat4 product = S(cur.pos, Rot3()) * S(a.delta_pos, a.delta_rot) * S(-cur.pos, Rot3()) * S(cur.pos, cur.rot);
    worst = std::max(worst, testing::max_abs_diff(widowx_goal_pose(cur, a).matrix(), product));
  }
  o.note("four-matrix deviation " + fmt("%.1e", worst));
  o.expect(worst <= 1e-12, "widowx goal differs from the matrix product");
  return o;
}

// ------------------------------------------------------------------ 7

Outcome sysid_recovery() {
  Outcome o;
  const ChainSpec chain = arm6();
  const int n = chain.size();
  const JointDynamics dyn = JointDynamics::for_chain(chain, VecX::Ones(n), VecX::Zero(n));
  const PDParams truth{VecX::Constant(n, 40.0), VecX::Constant(n, 8.0)};
  const auto ctrl = CtrlConfig::google_defaults();
  SyntheticSpec spec;
  spec.records = 5;
  spec.actions_per_record = 30;
  spec.seed = 7;
  const SysIdProblem problem(make_synthetic_dataset(chain, dyn, truth, ControllerKind::Google, ctrl, spec), chain, dyn,
                             ControllerKind::Google, ctrl);

  // Ten-fold range centred (geometrically) on the truth; start away from it.
  const double f = std::sqrt(10.0);
  const SysIdRange range{truth.p / f, truth.p * f, truth.d / f, truth.d * f};
  const PDParams init{range.p_low * 1.2, range.d_high * 0.9};
  AnnealConfig cfg;
  cfg.seed = 2024;
  cfg.tied = true;

  const auto t0 = std::chrono::steady_clock::now();
  const auto first = anneal_fit(problem, init, range, cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto second = anneal_fit(problem, init, range, cfg);
  const std::string a = io::sysid_result_to_json(first, cfg.seed).dump(2);
  const std::string b = io::sysid_result_to_json(second, cfg.seed).dump(2);

  o.note("initial=" + fmt("%.4g", first.initial_loss) + " final=" + fmt("%.3g", first.best_losses.total) + " p=" +
         fmt("%.2f", first.best.p(0)) + " d=" + fmt("%.2f", first.best.d(0)) + " fit " + fmt("%.1f s", seconds));
  o.expect(first.best_losses.total < 1e-3, "final loss not below 1e-3");
  o.expect(first.best_losses.total < 0.05 * first.initial_loss, "final loss not below 5% of the initial loss");
  o.expect(a == b, "identical seeds gave different output");
  o.expect(seconds < 120, "fit slower than 2 min");
  return o;
}

// ------------------------------------------------------------------ 8

// H from rank sums with the tie correction, for binary pooled data.
double h_from_counts(int ones_a, int na, int ones_b, int nb) {
  const double n = na + nb, ones = ones_a + ones_b, zeros = n - ones;
  if (ones == 0 || zeros == 0) return 0.0;
  const double rank_zero = (zeros + 1) / 2, rank_one = zeros + (ones + 1) / 2;
  const double ra = ones_a * rank_one + (na - ones_a) * rank_zero;
  const double rb = ones_b * rank_one + (nb - ones_b) * rank_zero;
  const double rbar = (n + 1) / 2;
  const double h = 12 / (n * (n + 1)) * (na * std::pow(ra / na - rbar, 2) + nb * std::pow(rb / nb - rbar, 2));
  return h / (1 - (ones * ones * ones - ones + zeros * zeros * zeros - zeros) / (n * n * n - n));
}

Outcome kruskal_oracle() {
  Outcome o;
  testing::Rng rng(801);
  std::mt19937_64 shuffle_gen(802);
  int within = 0;
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const int na = rng.integer(2, 25), nb = rng.integer(2, 25);
    const double pa = rng.uniform(0, 1), pb = rng.uniform(0, 1);
    std::vector<int> a(na), b(nb);
    for (auto& x : a) x = rng.uniform(0, 1) < pa;
    for (auto& x : b) x = rng.uniform(0, 1) < pb;
    const double p = kruskal_wallis(std::span<const int>(a), std::span<const int>(b)).p;

    const int ones_a = std::count(a.begin(), a.end(), 1), ones = ones_a + std::count(b.begin(), b.end(), 1);
    const double observed = h_from_counts(ones_a, na, ones - ones_a, nb);
    std::vector<int> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    int hits = 0;
    const int resamples = 100000;
    for (int r = 0; r < resamples; ++r) {
      std::shuffle(pooled.begin(), pooled.end(), shuffle_gen);
      const int moved = std::count(pooled.begin(), pooled.begin() + na, 1);
      hits += h_from_counts(moved, na, ones - moved, nb) >= observed - 1e-12;
    }
    const double gap = std::abs(p - static_cast<double>(hits) / resamples);
    worst = std::max(worst, gap);
    within += gap <= 0.02;
  }
  const std::vector<int> same{1, 1, 0, 0, 1, 0};
  const auto id = kruskal_wallis(std::span<const int>(same), std::span<const int>(same));
  o.note(std::to_string(within) + "/50 within 0.02, worst gap " + fmt("%.3f", worst));
  o.expect(within == 50, "chi-square p disagrees with the permutation p");
  o.expect(std::abs(id.h) <= 1e-12 && std::abs(id.p - 1) <= 1e-12, "identical groups do not give (0, 1)");
  return o;
}

// ------------------------------------------------------------------ 9-10

Outcome compositor_exactness() {
  Outcome o;
  testing::Rng rng(901);
  for (int k = 0; k < 10; ++k) {
    const int w = rng.integer(1, 128), h = rng.integer(1, 128);
    ImageRGB8 sim(w, h), real(w, h);
    MaskGray8 mask(w, h);
    for (auto& v : sim.pixels) v = static_cast<std::uint8_t>(rng.integer(0, 255));
    for (auto& v : real.pixels) v = static_cast<std::uint8_t>(rng.integer(0, 255));
    for (auto& v : mask.values) v = static_cast<std::uint8_t>(rng.integer(0, 255));
    for (auto mode : {CompositeMode::Hard, CompositeMode::Soft}) {
      o.expect(encode_ppm(composite(sim, MaskGray8(w, h, 255), real, mode)) == encode_ppm(sim), "all-255 mask != sim");
      o.expect(encode_ppm(composite(sim, MaskGray8(w, h, 0), real, mode)) == encode_ppm(real), "all-0 mask != real");
    }
    const std::string ppm = encode_ppm(sim), pgm = encode_pgm(mask);
    o.expect(encode_ppm(decode_ppm(ppm)) == ppm, "PPM round trip changed bytes");
    o.expect(encode_pgm(decode_pgm(pgm)) == pgm, "PGM round trip changed bytes");
  }
  return o;
}

Outcome kinematics_properties() {
  Outcome o;
  testing::Rng rng(1001);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const ChainSpec c = testing::random_chain(rng, rng.integer(1, 8));
    const VecX q = testing::random_q(rng, c, 0.9);
    const double h = 1e-6;
    Jacobian fd(6, c.size());
    for (int i = 0; i < c.size(); ++i) {
      VecX qp = q, qm = q;
      qp(i) += h;
      qm(i) -= h;
      const Pose a = fk(c, qp), b = fk(c, qm);
      fd.col(i).head<3>() = (a.pos - b.pos) / (2 * h);
      fd.col(i).tail<3>() = (a.rot * b.rot.transpose()).rotation_vector() / (2 * h);
    }
    worst = std::max(worst, (jacobian(c, q) - fd).cwiseAbs().maxCoeff());
  }
  const ChainSpec arm = arm6();
  int solved = 0;
  for (int k = 0; k < 500; ++k) {
    const VecX q_true = testing::random_q(rng, arm, 0.8);
    VecX seed = q_true;
    for (int i = 0; i < seed.size(); ++i) seed(i) += rng.uniform(-0.2, 0.2);
    solved += ik_dls(arm, fk(arm, q_true), seed).residual_pos <= 1e-4;
  }
  o.note("jacobian deviation " + fmt("%.1e", worst) + ", ik " + std::to_string(solved) + "/500");
  o.expect(worst <= 1e-5, "jacobian differs from finite differences");
  o.expect(solved >= 495, "ik solved fewer than 99% of targets");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "MMRV reproduction", 1, mmrv_reproduction},
      {2, "Pearson reproduction", 1, pearson_reproduction},
      {3, "success-delta reproduction", 1, shift_reproduction},
      {4, "rotation-loss identity", 5, rotation_identity},
      {5, "trajectory-planner properties", 30, planner_properties},
      {6, "controller fidelity", 5, controller_fidelity},
      {7, "sysid synthetic recovery", 240, sysid_recovery},
      {8, "Kruskal-Wallis oracle", 60, kruskal_oracle},
      {9, "compositor exactness", 1, compositor_exactness},
      {10, "kinematics properties", 30, kinematics_properties},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.expect(seconds < c.budget_s, "runtime over " + fmt("%.0f s", c.budget_s));
    failed += !o.pass;
    std::printf("%s  %2d  %-30s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
