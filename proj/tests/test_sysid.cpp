#include "doctest.h"
#include "realsim/errors.hpp"
#include "realsim/io.hpp"
#include "realsim/sysid.hpp"
#include "support.hpp"

using namespace realsim;
using testing::kPi;

namespace {

ChainSpec arm6() { return io::chain_from_json(io::load_json(testing::data_path("arm6.json"))); }

JointDynamics unit_plant(const ChainSpec& c) {
  return JointDynamics::for_chain(c, VecX::Ones(c.size()), VecX::Zero(c.size()));
}

PDParams gains(int n, double p, double d) { return PDParams{VecX::Constant(n, p), VecX::Constant(n, d)}; }

SysIdRange range_around(const PDParams& pd, double factor) {
  return {pd.p / factor, pd.p * factor, pd.d / factor, pd.d * factor};
}

// A small dataset: 3 records of 6 actions under (40, 8).
SysIdProblem small_problem(ControllerKind kind = ControllerKind::Google) {
  const ChainSpec c = arm6();
  const auto cfg = CtrlConfig::defaults_for(kind);
  SyntheticSpec spec;
  spec.records = 3;
  spec.actions_per_record = 6;
  spec.seed = 5;
  auto data = make_synthetic_dataset(c, unit_plant(c), gains(6, 40, 8), kind, cfg, spec);
  return SysIdProblem(std::move(data), c, unit_plant(c), kind, cfg);
}

AnnealConfig quick(std::uint64_t seed, bool tied = false) {
  AnnealConfig a;
  a.iters_per_round = 25;
  a.seed = seed;
  a.tied = tied;
  return a;
}

}  // namespace

TEST_CASE("trajectory losses: examples") {
  const std::vector<Pose> a{Pose{}}, b{Pose::translation(Vec3(0.3, 0, 0))}, r{Pose{Rot3::rot_z(kPi / 2), Vec3::Zero()}};
  const auto same = trajectory_losses(a, a);
  CHECK(same.transl == 0.0);
  CHECK(same.rot == 0.0);
  CHECK(same.total == 0.0);
  const auto shifted = trajectory_losses(a, b);
  CHECK(shifted.transl == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(shifted.rot == 0.0);
  CHECK(shifted.total == doctest::Approx(0.3).epsilon(1e-15));
  const auto turned = trajectory_losses(a, r);
  CHECK(turned.transl == 0.0);
  CHECK(turned.rot == doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(turned.total == doctest::Approx(kPi / 4).epsilon(1e-12));
}

TEST_CASE("trajectory losses average over the sequence") {
  const std::vector<Pose> ref{Pose{}, Pose{}, Pose{}, Pose{}};
  const std::vector<Pose> sim{Pose{}, Pose::translation(Vec3(0, 0.4, 0)), Pose{Rot3::rot_x(0.6), Vec3::Zero()}, Pose{}};
  const auto l = trajectory_losses(ref, sim);
  CHECK(l.transl == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(l.rot == doctest::Approx(0.075).epsilon(1e-12));
  CHECK_THROWS_AS(trajectory_losses(ref, std::vector<Pose>(3)), ValidationError);
  CHECK_THROWS_AS(trajectory_losses({}, {}), ValidationError);
}

TEST_CASE("normalize and denormalize round trip") {
  testing::Rng rng(51);
  for (int k = 0; k < 100; ++k) {
    VecX lo(4), hi(4), x(4);
    for (int i = 0; i < 4; ++i) {
      lo(i) = rng.uniform(0, 100);
      hi(i) = lo(i) + rng.uniform(0.1, 500);
      x(i) = rng.uniform(lo(i), hi(i));
    }
    CHECK((denormalize(normalize(x, lo, hi), lo, hi) - x).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("pack and unpack parameters") {
  const PDParams pd{(VecX(3) << 1, 2, 3).finished(), (VecX(3) << 4, 5, 6).finished()};
  const VecX theta = pack_params(pd, false);
  CHECK(theta.size() == 6);
  const PDParams back = unpack_params(theta, 3, false);
  CHECK(back.p == pd.p);
  CHECK(back.d == pd.d);
  const PDParams tied = unpack_params(pack_params(gains(3, 7, 2), true), 3, true);
  CHECK(tied.p == VecX::Constant(3, 7));
  CHECK(tied.d == VecX::Constant(3, 2));
}

TEST_CASE("parallel dataset loss equals the serial reference bit for bit") {
  const SysIdProblem prob = small_problem();
  for (double p : {10.0, 40.0, 90.0}) {
    const auto a = dataset_loss(prob, gains(6, p, p / 5));
    const auto b = dataset_loss_serial(prob, gains(6, p, p / 5));
    CHECK(a.total == b.total);
    CHECK(a.transl == b.transl);
    CHECK(a.rot == b.rot);
    // Objective purity.
    CHECK(dataset_loss(prob, gains(6, p, p / 5)).total == a.total);
  }
  CHECK(dataset_loss(prob, gains(6, 40, 8)).total < 1e-12);
}

TEST_CASE("anneal: same seed gives identical histories") {
  const SysIdProblem prob = small_problem();
  const PDParams truth = gains(6, 40, 8);
  const auto range = range_around(truth, std::sqrt(10.0));
  const PDParams init{range.p_low * 1.5, range.d_high * 0.8};
  const auto a = anneal_fit(prob, init, range, quick(9));
  const auto b = anneal_fit(prob, init, range, quick(9));
  REQUIRE(a.history.size() == 3);
  for (std::size_t r = 0; r < a.history.size(); ++r) {
    CHECK(a.history[r].best_loss == b.history[r].best_loss);
    CHECK(a.history[r].best.p == b.history[r].best.p);
    CHECK(a.history[r].best.d == b.history[r].best.d);
    CHECK(a.history[r].evals == 25);
  }
  const auto c = anneal_fit(prob, init, range, quick(10));
  CHECK(c.history.back().best.p != a.history.back().best.p);
}

TEST_CASE("anneal: incumbent never worsens and proposals stay in range") {
  const SysIdProblem prob = small_problem();
  const PDParams truth = gains(6, 40, 8);
  const auto range0 = range_around(truth, std::sqrt(10.0));
  const PDParams init{range0.p_high * 0.9, range0.d_low * 1.1};
  double last_best = std::numeric_limits<double>::infinity();
  bool monotone = true, inside = true, subset = true;
  int events = 0;
  const auto result = anneal_fit(prob, init, range0, quick(3), [&](const AnnealEvent& e) {
    ++events;
    if (e.best_loss > last_best) monotone = false;
    last_best = e.best_loss;
    if (!e.range->contains(e.proposal)) inside = false;
    if (!range0.contains(PDParams{e.range->p_low, e.range->d_low}) ||
        !range0.contains(PDParams{e.range->p_high, e.range->d_high})) {
      subset = false;
    }
  });
  CHECK(events == 75);
  CHECK(monotone);
  CHECK(inside);
  CHECK(subset);
  for (std::size_t r = 1; r < result.history.size(); ++r) {
    CHECK(result.history[r].best_loss <= result.history[r - 1].best_loss);
    // Each later range is the previous width halved (or clipped by range0).
    const VecX w_prev = result.history[r - 1].range.p_high - result.history[r - 1].range.p_low;
    const VecX w = result.history[r].range.p_high - result.history[r].range.p_low;
    CHECK(((w.array() <= 0.5 * w_prev.array() + 1e-9)).all());
  }
  CHECK(result.best_losses.total <= result.initial_loss);
  CHECK(result.best_losses.total == result.history.back().best_loss);
  CHECK(result.best_losses.total < 0.5 * result.initial_loss);
}

TEST_CASE("anneal: optimal start stays optimal") {
  const SysIdProblem prob = small_problem();
  const PDParams truth = gains(6, 40, 8);
  const auto result = anneal_fit(prob, truth, range_around(truth, std::sqrt(10.0)), quick(4));
  CHECK(result.initial_loss < 1e-12);
  CHECK(result.best_losses.total <= result.initial_loss);
  for (const auto& h : result.history) CHECK(h.best_loss <= result.initial_loss);
}

TEST_CASE("anneal: tied gains recover the generating pair") {
  const SysIdProblem prob = small_problem();
  const PDParams truth = gains(6, 40, 8);
  const auto range = range_around(truth, std::sqrt(10.0));
  AnnealConfig cfg = quick(2, true);
  cfg.iters_per_round = 120;
  const auto result = anneal_fit(prob, PDParams{range.p_low * 1.2, range.d_high * 0.9}, range, cfg);
  CHECK((result.best.p.array() == result.best.p(0)).all());
  CHECK(result.best_losses.total < 0.05 * result.initial_loss);
  CHECK(std::abs(result.best.p(0) - 40.0) < 8.0);
}

TEST_CASE("anneal: input validation") {
  const SysIdProblem prob = small_problem();
  const PDParams truth = gains(6, 40, 8);
  const auto range = range_around(truth, 2.0);
  CHECK_THROWS_AS(anneal_fit(prob, gains(6, 500, 8), range, quick(1)), ValidationError);
  SysIdRange flat = range;
  flat.p_high = flat.p_low;
  CHECK_THROWS_AS(anneal_fit(prob, truth, flat, quick(1)), ValidationError);
  AnnealConfig bad = quick(1);
  bad.cooling = 1.5;
  CHECK_THROWS_AS(anneal_fit(prob, truth, range, bad), ValidationError);
  PDParams uneven = truth;
  uneven.p(2) = 41;
  CHECK_THROWS_AS(anneal_fit(prob, uneven, range, quick(1, true)), ValidationError);
}

TEST_CASE("replay failures name the record") {
  const ChainSpec c = arm6();
  auto data = small_problem().dataset();
  data[1].joint_positions = std::vector<VecX>{VecX::Zero(3)};
  try {
    SysIdProblem(data, c, unit_plant(c), ControllerKind::Google, CtrlConfig{});
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("record #1") != std::string::npos);
  }
  CHECK_THROWS_AS(SysIdProblem({}, c, unit_plant(c), ControllerKind::Google, CtrlConfig{}), ValidationError);
}

TEST_CASE("widowx datasets work end to end") {
  const SysIdProblem prob = small_problem(ControllerKind::WidowX);
  CHECK(dataset_loss(prob, gains(6, 40, 8)).total < 1e-12);
  CHECK(dataset_loss(prob, gains(6, 10, 8)).total > 1e-4);
}
