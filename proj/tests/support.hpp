#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "realsim/chain.hpp"
#include "realsim/geometry.hpp"

namespace testing {

using namespace realsim;

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(REALSIM_TEST_DATA_DIR) / name;
}

inline constexpr double kPi = 3.14159265358979323846;

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }

  Vec3 vec3(double scale = 1.0) { return Vec3(uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)); }
  Vec3 unit() { return Vec3(normal(), normal(), normal()).normalized(); }

  // Uniform on SO(3): normalized Gaussian quaternion.
  Rot3 rotation() {
    Eigen::Vector4d q(normal(), normal(), normal(), normal());
    q.normalize();
    return quat_to_rot(UnitQuat::make(q(0), q(1), q(2), q(3)));
  }
  Pose pose(double scale = 1.0) { return Pose{rotation(), vec3(scale)}; }
};

// Two unit links rotating about z; tool at the end of link 2.
inline ChainSpec planar2() {
  std::vector<JointSpec> j(2);
  j[0] = {"j1", JointKind::Revolute, Pose{}, Vec3::UnitZ(), -kPi, kPi};
  j[1] = {"j2", JointKind::Revolute, Pose::translation(Vec3(1, 0, 0)), Vec3::UnitZ(), -kPi, kPi};
  return ChainSpec(j, Pose::translation(Vec3(1, 0, 0)));
}

inline ChainSpec random_chain(Rng& rng, int n) {
  std::vector<JointSpec> joints;
  for (int i = 0; i < n; ++i) {
    JointSpec s;
    s.name = "j" + std::to_string(i);
    s.kind = rng.uniform(0, 1) < 0.8 ? JointKind::Revolute : JointKind::Prismatic;
    s.origin = Pose{rng.rotation(), rng.vec3(0.4)};
    s.axis = rng.unit();
    s.lower = s.kind == JointKind::Revolute ? -2.5 : -0.5;
    s.upper = -s.lower;
    joints.push_back(s);
  }
  return ChainSpec(joints, Pose{rng.rotation(), rng.vec3(0.2)});
}

inline VecX random_q(Rng& rng, const ChainSpec& chain, double fraction = 1.0) {
  VecX q(chain.size());
  for (int i = 0; i < chain.size(); ++i) {
    const auto& j = chain.joints()[static_cast<std::size_t>(i)];
    const double mid = 0.5 * (j.lower + j.upper), half = 0.5 * (j.upper - j.lower);
    q(i) = mid + fraction * half * rng.uniform(-1, 1);
  }
  return q;
}

inline double max_abs_diff(const Mat4& a, const Mat4& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing
