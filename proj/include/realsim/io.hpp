#pragma once

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "realsim/chain.hpp"
#include "realsim/controller.hpp"
#include "realsim/jointsim.hpp"
#include "realsim/metrics.hpp"
#include "realsim/sysid.hpp"

namespace realsim::io {

using nlohmann::json;

// Field access with JSON-pointer-style paths in error messages. Keys starting
// with '_' are treated as comments and always allowed.
const json& require(const json& obj, std::string_view key, const std::string& path);
double number(const json& v, const std::string& path);
std::string string(const json& v, const std::string& path);
std::vector<double> numbers(const json& v, const std::string& path, std::optional<std::size_t> size = {});
VecX vector(const json& v, const std::string& path, std::optional<std::size_t> size = {});
void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& path);

/// Parses a file; syntax errors become InputError naming the file.
json load_json(const std::filesystem::path& path);
/// Parses a document from text; `origin` labels error messages.
json parse_json(std::string_view text, const std::string& origin);

// { "xyz": [x, y, z], "quat_wxyz": [w, x, y, z] }
json pose_to_json(const Pose& p);
Pose pose_from_json(const json& j, const std::string& path);

// { "joints": [{ "name", "type", "origin", "axis", "limit": [lo, hi] }], "ee_offset": pose }
json chain_to_json(const ChainSpec& chain);
ChainSpec chain_from_json(const json& j, const std::string& path = "");

// { "ctrl_frequency", "actions": [{ "xyz", "rot_axis_angle" | "quat_wxyz", "gripper" }],
//   "ee_poses": [pose], "joint_positions"?: [[...]] }
json record_to_json(const TrajectoryRecord& rec);
TrajectoryRecord record_from_json(const json& j, const std::string& path = "");

// A single table object, or { "tables": [table, ...] }.
std::vector<PairedEvalTable> tables_from_json(const json& j, const std::string& path = "");
json table_to_json(const PairedEvalTable& t);

struct ShiftEntry {
  std::string policy;
  std::string task;
  std::string factor;
  ShiftEval eval;
};
// { "entries": [{ "policy", "task", "base", "factors": [{ "factor", "variants": [...] }] }] }
std::vector<ShiftEntry> shifts_from_json(const json& j, const std::string& path = "");

json pd_to_json(const PDParams& pd);
PDParams pd_from_json(const json& j, const std::string& path);

/// Run configuration shared by the replay, sysid and synth workflows.
/// Every field defaults to the reference controller constants.
struct RunConfig {
  ControllerKind controller = ControllerKind::Google;
  CtrlConfig ctrl = CtrlConfig::google_defaults();
  std::optional<VecX> inertia;
  std::optional<VecX> passive_damping;
  std::optional<PDParams> init;
  std::optional<SysIdRange> range;
  AnnealConfig anneal;

  JointDynamics dynamics_for(const ChainSpec& chain) const;
};

inline constexpr int kConfigSchemaVersion = 1;

RunConfig run_config_from_json(const json& j, const std::string& path = "");
json run_config_to_json(const RunConfig& cfg);

json sysid_result_to_json(const SysIdResult& r, std::uint64_t seed);

/// Text written with a trailing newline; "-" writes to stdout.
void write_text(const std::string& target, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace realsim::io
