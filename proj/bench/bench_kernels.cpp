#include <benchmark/benchmark.h>

#include <random>

#include "realsim/imaging.hpp"
#include "realsim/sysid.hpp"

using namespace realsim;

namespace {

ChainSpec bench_arm() {
  std::vector<JointSpec> joints;
  const Vec3 axes[] = {Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitX()};
  const Vec3 offsets[] = {Vec3(0, 0, 0.3),  Vec3(0, 0, 0.1),  Vec3(0.4, 0, 0),
                          Vec3(0.35, 0, 0), Vec3(0.05, 0, 0), Vec3(0.05, 0, 0)};
  for (int i = 0; i < 6; ++i) {
    JointSpec j;
    j.name = "j" + std::to_string(i);
    j.kind = JointKind::Revolute;
    j.axis = axes[i];
    j.origin = Pose::translation(offsets[i]);
    j.lower = -2.5;
    j.upper = 2.5;
    joints.push_back(j);
  }
  return ChainSpec(joints, Pose::translation(Vec3(0.08, 0, 0)));
}

const SysIdProblem& problem() {
  static const SysIdProblem prob = [] {
    const ChainSpec chain = bench_arm();
    const JointDynamics dyn = JointDynamics::for_chain(chain, VecX::Ones(6), VecX::Zero(6));
    const PDParams truth{VecX::Constant(6, 40.0), VecX::Constant(6, 8.0)};
    const auto cfg = CtrlConfig::google_defaults();
    SyntheticSpec spec;
    spec.records = 8;
    spec.actions_per_record = 10;
    return SysIdProblem(make_synthetic_dataset(chain, dyn, truth, ControllerKind::Google, cfg, spec), chain, dyn,
                        ControllerKind::Google, cfg);
  }();
  return prob;
}

const PDParams kProbe{VecX::Constant(6, 30.0), VecX::Constant(6, 10.0)};

void BM_DatasetLoss(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dataset_loss(problem(), kProbe));
}

void BM_DatasetLossSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dataset_loss_serial(problem(), kProbe));
}

struct Frames {
  ImageRGB8 sim, real;
  MaskGray8 mask;
};

Frames frames(int side) {
  std::mt19937 gen(1);
  std::uniform_int_distribution<int> byte(0, 255);
  Frames f{ImageRGB8(side, side), ImageRGB8(side, side), MaskGray8(side, side)};
  for (auto& b : f.sim.pixels) b = static_cast<std::uint8_t>(byte(gen));
  for (auto& b : f.real.pixels) b = static_cast<std::uint8_t>(byte(gen));
  for (auto& b : f.mask.values) b = static_cast<std::uint8_t>(byte(gen));
  return f;
}

void BM_Composite(benchmark::State& state) {
  const Frames f = frames(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(composite(f.sim, f.mask, f.real, CompositeMode::Soft));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(f.sim.pixels.size()));
}

void BM_CompositeSerial(benchmark::State& state) {
  const Frames f = frames(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(composite_serial(f.sim, f.mask, f.real, CompositeMode::Soft));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(f.sim.pixels.size()));
}

}  // namespace

BENCHMARK(BM_DatasetLoss)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DatasetLossSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Composite)->Arg(256)->Arg(1024);
BENCHMARK(BM_CompositeSerial)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
