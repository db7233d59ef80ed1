#include "realsim/io.hpp"

#include <fstream>
#include <iostream>
#include <iterator>
#include <set>

#include "realsim/errors.hpp"

namespace realsim::io {

namespace {

std::string child(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

const json& array_at(const json& obj, std::string_view key, const std::string& path) {
  const json& a = require(obj, key, path);
  if (!a.is_array()) throw InputError(child(path, key) + ": expected an array");
  return a;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw InputError((path.empty() ? "/" : path) + ": expected an object");
}

ControllerKind controller_from_string(const std::string& s, const std::string& path) {
  if (s == "google") return ControllerKind::Google;
  if (s == "widowx") return ControllerKind::WidowX;
  throw InputError(path + ": unknown controller '" + s + "' (expected google or widowx)");
}

LimitSet limits_from_json(const json& j, const std::string& path) {
  const auto v = numbers(j, path, 3);
  return LimitSet{v[0], v[1], v[2]};
}

json range_to_json(const SysIdRange& r) {
  auto vec = [](const VecX& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return json{{"p_low", vec(r.p_low)}, {"p_high", vec(r.p_high)}, {"d_low", vec(r.d_low)}, {"d_high", vec(r.d_high)}};
}

std::vector<double> to_std(const VecX& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

const json& require(const json& obj, std::string_view key, const std::string& path) {
  require_object(obj, path);
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) throw InputError(child(path, key) + ": missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw InputError(path + ": expected a number");
  return v.get<double>();
}

std::string string(const json& v, const std::string& path) {
  if (!v.is_string()) throw InputError(path + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path, std::optional<std::size_t> size) {
  if (!v.is_array()) throw InputError(path + ": expected an array of numbers");
  if (size && v.size() != *size) {
    throw InputError(path + ": expected " + std::to_string(*size) + " numbers, got " + std::to_string(v.size()));
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], child(path, i)));
  return out;
}

VecX vector(const json& v, const std::string& path, std::optional<std::size_t> size) {
  const auto n = numbers(v, path, size);
  return Eigen::Map<const VecX>(n.data(), static_cast<Eigen::Index>(n.size()));
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& path) {
  require_object(obj, path);
  for (const auto& [key, _] : obj.items()) {
    if (!key.empty() && key[0] == '_') continue;
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw InputError(child(path, key) + ": unknown field");
  }
}

json parse_json(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(origin + ": malformed JSON: " + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json load_json(const std::filesystem::path& path) { return parse_json(read_text(path), path.string()); }

void write_text(const std::string& target, const std::string& text) {
  if (target == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(target, std::ios::binary);
  if (!out) throw InputError("cannot write '" + target + "'");
  out << text;
}

json pose_to_json(const Pose& p) {
  const UnitQuat q = rot_to_quat(p.rot);
  return json{{"xyz", {p.pos.x(), p.pos.y(), p.pos.z()}}, {"quat_wxyz", {q.w, q.x, q.y, q.z}}};
}

Pose pose_from_json(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"xyz", "quat_wxyz"}, path);
  const auto xyz = numbers(require(j, "xyz", path), child(path, "xyz"), 3);
  const auto q = numbers(require(j, "quat_wxyz", path), child(path, "quat_wxyz"), 4);
  try {
    return Pose{quat_to_rot(UnitQuat::make(q[0], q[1], q[2], q[3])), Vec3(xyz[0], xyz[1], xyz[2])};
  } catch (const ValidationError& e) {
    throw ValidationError(child(path, "quat_wxyz") + ": " + e.what());
  }
}

json chain_to_json(const ChainSpec& chain) {
  json joints = json::array();
  for (const auto& jt : chain.joints()) {
    joints.push_back(json{{"name", jt.name},
                          {"type", jt.kind == JointKind::Revolute ? "revolute" : "prismatic"},
                          {"origin", pose_to_json(jt.origin)},
                          {"axis", {jt.axis.x(), jt.axis.y(), jt.axis.z()}},
                          {"limit", {jt.lower, jt.upper}}});
  }
  return json{{"joints", joints}, {"ee_offset", pose_to_json(chain.ee_offset())}};
}

ChainSpec chain_from_json(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"joints", "ee_offset"}, path);
  const json& arr = array_at(j, "joints", path);
  std::vector<JointSpec> joints;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = child(child(path, "joints"), i);
    reject_unknown_keys(arr[i], {"name", "type", "origin", "axis", "limit"}, p);
    JointSpec spec;
    spec.name = string(require(arr[i], "name", p), child(p, "name"));
    const std::string type = string(require(arr[i], "type", p), child(p, "type"));
    if (type == "revolute") {
      spec.kind = JointKind::Revolute;
    } else if (type == "prismatic") {
      spec.kind = JointKind::Prismatic;
    } else {
      throw InputError(child(p, "type") + ": unsupported joint type '" + type + "'");
    }
    spec.origin = arr[i].contains("origin") ? pose_from_json(arr[i]["origin"], child(p, "origin")) : Pose{};
    const auto axis = numbers(require(arr[i], "axis", p), child(p, "axis"), 3);
    spec.axis = Vec3(axis[0], axis[1], axis[2]);
    if (std::abs(spec.axis.norm() - 1.0) > 1e-6) throw ValidationError(child(p, "axis") + ": axis must be unit length");
    spec.axis.normalize();
    const auto lim = numbers(require(arr[i], "limit", p), child(p, "limit"), 2);
    spec.lower = lim[0];
    spec.upper = lim[1];
    joints.push_back(std::move(spec));
  }
  const Pose ee = j.contains("ee_offset") ? pose_from_json(j["ee_offset"], child(path, "ee_offset")) : Pose{};
  return ChainSpec(std::move(joints), ee);
}

json record_to_json(const TrajectoryRecord& rec) {
  json actions = json::array();
  for (const auto& a : rec.actions) {
    const UnitQuat q = rot_to_quat(a.delta_rot);
    actions.push_back(json{{"xyz", {a.delta_pos.x(), a.delta_pos.y(), a.delta_pos.z()}},
                           {"quat_wxyz", {q.w, q.x, q.y, q.z}},
                           {"gripper", a.gripper}});
  }
  json poses = json::array();
  for (const auto& p : rec.ee_poses) poses.push_back(pose_to_json(p));
  json out{{"ctrl_frequency", rec.ctrl_frequency}, {"actions", actions}, {"ee_poses", poses}};
  if (rec.joint_positions) {
    json jp = json::array();
    for (const auto& q : *rec.joint_positions) jp.push_back(to_std(q));
    out["joint_positions"] = jp;
  }
  return out;
}

TrajectoryRecord record_from_json(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"ctrl_frequency", "actions", "ee_poses", "joint_positions"}, path);
  TrajectoryRecord rec;
  rec.ctrl_frequency = number(require(j, "ctrl_frequency", path), child(path, "ctrl_frequency"));
  const json& actions = array_at(j, "actions", path);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const std::string p = child(child(path, "actions"), i);
    reject_unknown_keys(actions[i], {"xyz", "rot_axis_angle", "quat_wxyz", "gripper"}, p);
    Action a;
    const auto xyz = numbers(require(actions[i], "xyz", p), child(p, "xyz"), 3);
    a.delta_pos = Vec3(xyz[0], xyz[1], xyz[2]);
    const bool has_aa = actions[i].contains("rot_axis_angle");
    const bool has_q = actions[i].contains("quat_wxyz");
    if (has_aa == has_q) throw InputError(p + ": exactly one of rot_axis_angle or quat_wxyz is required");
    if (has_aa) {
      const auto rv = numbers(actions[i]["rot_axis_angle"], child(p, "rot_axis_angle"), 3);
      a.delta_rot = Rot3::from_rotation_vector(Vec3(rv[0], rv[1], rv[2]));
    } else {
      const auto q = numbers(actions[i]["quat_wxyz"], child(p, "quat_wxyz"), 4);
      a.delta_rot = quat_to_rot(UnitQuat::make(q[0], q[1], q[2], q[3]));
    }
    a.gripper = actions[i].contains("gripper") ? number(actions[i]["gripper"], child(p, "gripper")) : 0.0;
    rec.actions.push_back(a);
  }
  const json& poses = array_at(j, "ee_poses", path);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    rec.ee_poses.push_back(pose_from_json(poses[i], child(child(path, "ee_poses"), i)));
  }
  if (j.contains("joint_positions")) {
    std::vector<VecX> jp;
    const json& arr = array_at(j, "joint_positions", path);
    for (std::size_t i = 0; i < arr.size(); ++i) jp.push_back(vector(arr[i], child(child(path, "joint_positions"), i)));
    rec.joint_positions = std::move(jp);
  }
  rec.validate();
  return rec;
}

namespace {

std::vector<int> trials_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw InputError(path + ": expected an array of 0/1");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer() || (j[i].get<int>() != 0 && j[i].get<int>() != 1)) {
      throw InputError(child(path, i) + ": trial outcome must be 0 or 1");
    }
    out.push_back(j[i].get<int>());
  }
  return out;
}

PairedEvalTable table_from_json(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"task", "evals"}, path);
  PairedEvalTable t;
  t.task = string(require(j, "task", path), child(path, "task"));
  const json& evals = array_at(j, "evals", path);
  for (std::size_t i = 0; i < evals.size(); ++i) {
    const std::string p = child(child(path, "evals"), i);
    reject_unknown_keys(evals[i], {"policy_id", "real_rate", "sim_rate", "real_trials", "sim_trials"}, p);
    PolicyEval e;
    e.policy_id = string(require(evals[i], "policy_id", p), child(p, "policy_id"));
    e.real_rate = number(require(evals[i], "real_rate", p), child(p, "real_rate"));
    e.sim_rate = number(require(evals[i], "sim_rate", p), child(p, "sim_rate"));
    if (evals[i].contains("real_trials"))
      e.real_trials = trials_from_json(evals[i]["real_trials"], child(p, "real_trials"));
    if (evals[i].contains("sim_trials"))
      e.sim_trials = trials_from_json(evals[i]["sim_trials"], child(p, "sim_trials"));
    t.evals.push_back(std::move(e));
  }
  t.validate();
  return t;
}

}  // namespace

std::vector<PairedEvalTable> tables_from_json(const json& j, const std::string& path) {
  require_object(j, path);
  if (!j.contains("tables")) return {table_from_json(j, path)};
  reject_unknown_keys(j, {"tables"}, path);
  const json& arr = array_at(j, "tables", path);
  std::vector<PairedEvalTable> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(table_from_json(arr[i], child(child(path, "tables"), i)));
  return out;
}

json table_to_json(const PairedEvalTable& t) {
  json evals = json::array();
  for (const auto& e : t.evals) {
    json row{{"policy_id", e.policy_id}, {"real_rate", e.real_rate}, {"sim_rate", e.sim_rate}};
    if (e.real_trials) row["real_trials"] = *e.real_trials;
    if (e.sim_trials) row["sim_trials"] = *e.sim_trials;
    evals.push_back(row);
  }
  return json{{"task", t.task}, {"evals", evals}};
}

std::vector<ShiftEntry> shifts_from_json(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"entries"}, path);
  const json& entries = array_at(j, "entries", path);
  std::vector<ShiftEntry> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string p = child(child(path, "entries"), i);
    reject_unknown_keys(entries[i], {"policy", "task", "base", "factors"}, p);
    const std::string policy = string(require(entries[i], "policy", p), child(p, "policy"));
    const std::string task = string(require(entries[i], "task", p), child(p, "task"));
    const double base = number(require(entries[i], "base", p), child(p, "base"));
    const json& factors = entries[i].contains("factors") ? entries[i]["factors"] : json::array();
    if (!factors.is_array()) throw InputError(child(p, "factors") + ": expected an array");
    if (factors.empty()) throw ValidationError(p + ": base rate without any shifted variants");
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const std::string fp = child(child(p, "factors"), k);
      reject_unknown_keys(factors[k], {"factor", "variants"}, fp);
      ShiftEntry e{policy, task, string(require(factors[k], "factor", fp), child(fp, "factor")), {base, {}}};
      e.eval.variant_rates = numbers(require(factors[k], "variants", fp), child(fp, "variants"));
      if (e.eval.variant_rates.empty()) throw ValidationError(child(fp, "variants") + ": no variants");
      out.push_back(std::move(e));
    }
  }
  return out;
}

json pd_to_json(const PDParams& pd) { return json{{"p", to_std(pd.p)}, {"d", to_std(pd.d)}}; }

PDParams pd_from_json(const json& j, const std::string& path) {
  reject_unknown_keys(j, {"p", "d"}, path);
  PDParams pd{vector(require(j, "p", path), child(path, "p")), vector(require(j, "d", path), child(path, "d"))};
  if (pd.p.size() != pd.d.size()) throw ValidationError((path.empty() ? "/" : path) + ": p and d differ in length");
  return pd;
}

JointDynamics RunConfig::dynamics_for(const ChainSpec& chain) const {
  const VecX m = inertia.value_or(VecX::Ones(chain.size()));
  const VecX b = passive_damping.value_or(VecX::Zero(chain.size()));
  if (m.size() != chain.size() || b.size() != chain.size()) {
    throw ValidationError("config /dynamics: expected " + std::to_string(chain.size()) + " entries per vector");
  }
  return JointDynamics::for_chain(chain, m, b);
}

RunConfig run_config_from_json(const json& j, const std::string& path) {
  reject_unknown_keys(j,
                      {"schema_version", "controller", "sim_hz", "ctrl_hz", "arm_limits", "grip_limits",
                       "grip_filter_threshold", "ik", "dynamics", "init", "range", "anneal"},
                      path);
  if (j.contains("schema_version") &&
      number(j["schema_version"], child(path, "schema_version")) != kConfigSchemaVersion) {
    throw InputError(child(path, "schema_version") + ": unsupported schema version");
  }
  RunConfig cfg;
  if (j.contains("controller")) {
    cfg.controller =
        controller_from_string(string(j["controller"], child(path, "controller")), child(path, "controller"));
  }
  cfg.ctrl = CtrlConfig::defaults_for(cfg.controller);
  if (j.contains("sim_hz")) cfg.ctrl.sim_hz = number(j["sim_hz"], child(path, "sim_hz"));
  if (j.contains("ctrl_hz")) cfg.ctrl.ctrl_hz = number(j["ctrl_hz"], child(path, "ctrl_hz"));
  if (j.contains("arm_limits")) cfg.ctrl.arm_limits = limits_from_json(j["arm_limits"], child(path, "arm_limits"));
  if (j.contains("grip_limits")) cfg.ctrl.grip_limits = limits_from_json(j["grip_limits"], child(path, "grip_limits"));
  if (j.contains("grip_filter_threshold")) {
    cfg.ctrl.grip_filter_threshold = number(j["grip_filter_threshold"], child(path, "grip_filter_threshold"));
  }
  if (j.contains("ik")) {
    const json& ik = j["ik"];
    const std::string p = child(path, "ik");
    reject_unknown_keys(ik, {"damping", "max_iters", "tol_pos", "tol_rot", "max_step"}, p);
    if (ik.contains("damping")) cfg.ctrl.ik.damping = number(ik["damping"], child(p, "damping"));
    if (ik.contains("max_iters"))
      cfg.ctrl.ik.max_iters = static_cast<int>(number(ik["max_iters"], child(p, "max_iters")));
    if (ik.contains("tol_pos")) cfg.ctrl.ik.tol_pos = number(ik["tol_pos"], child(p, "tol_pos"));
    if (ik.contains("tol_rot")) cfg.ctrl.ik.tol_rot = number(ik["tol_rot"], child(p, "tol_rot"));
    if (ik.contains("max_step")) cfg.ctrl.ik.max_step = number(ik["max_step"], child(p, "max_step"));
  }
  if (j.contains("dynamics")) {
    const json& d = j["dynamics"];
    const std::string p = child(path, "dynamics");
    reject_unknown_keys(d, {"inertia", "passive_damping"}, p);
    if (d.contains("inertia")) cfg.inertia = vector(d["inertia"], child(p, "inertia"));
    if (d.contains("passive_damping")) cfg.passive_damping = vector(d["passive_damping"], child(p, "passive_damping"));
  }
  if (j.contains("init")) cfg.init = pd_from_json(j["init"], child(path, "init"));
  if (j.contains("range")) {
    const json& r = j["range"];
    const std::string p = child(path, "range");
    reject_unknown_keys(r, {"p_low", "p_high", "d_low", "d_high"}, p);
    cfg.range = SysIdRange{
        vector(require(r, "p_low", p), child(p, "p_low")), vector(require(r, "p_high", p), child(p, "p_high")),
        vector(require(r, "d_low", p), child(p, "d_low")), vector(require(r, "d_high", p), child(p, "d_high"))};
  }
  if (j.contains("anneal")) {
    const json& a = j["anneal"];
    const std::string p = child(path, "anneal");
    reject_unknown_keys(a, {"rounds", "iters_per_round", "t0_factor", "cooling", "sigma", "shrink", "seed", "tied"}, p);
    if (a.contains("rounds")) cfg.anneal.rounds = static_cast<int>(number(a["rounds"], child(p, "rounds")));
    if (a.contains("iters_per_round"))
      cfg.anneal.iters_per_round = static_cast<int>(number(a["iters_per_round"], child(p, "iters_per_round")));
    if (a.contains("t0_factor")) cfg.anneal.t0_factor = number(a["t0_factor"], child(p, "t0_factor"));
    if (a.contains("cooling")) cfg.anneal.cooling = number(a["cooling"], child(p, "cooling"));
    if (a.contains("sigma")) cfg.anneal.sigma = number(a["sigma"], child(p, "sigma"));
    if (a.contains("shrink")) cfg.anneal.shrink = number(a["shrink"], child(p, "shrink"));
    if (a.contains("seed")) {
      const json& seed = a["seed"];
      if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
        throw InputError(child(p, "seed") + ": expected a non-negative integer");
      }
      cfg.anneal.seed = a["seed"].get<std::uint64_t>();
    }
    if (a.contains("tied")) {
      if (!a["tied"].is_boolean()) throw InputError(child(p, "tied") + ": expected a boolean");
      cfg.anneal.tied = a["tied"].get<bool>();
    }
  }
  cfg.ctrl.validate();
  cfg.anneal.validate();
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  const auto& c = cfg.ctrl;
  json j{{"schema_version", kConfigSchemaVersion},
         {"controller", cfg.controller == ControllerKind::Google ? "google" : "widowx"},
         {"sim_hz", c.sim_hz},
         {"ctrl_hz", c.ctrl_hz},
         {"arm_limits", {c.arm_limits.v_max, c.arm_limits.a_max, c.arm_limits.j_max}},
         {"grip_limits", {c.grip_limits.v_max, c.grip_limits.a_max, c.grip_limits.j_max}},
         {"grip_filter_threshold", c.grip_filter_threshold},
         {"ik",
          {{"damping", c.ik.damping},
           {"max_iters", c.ik.max_iters},
           {"tol_pos", c.ik.tol_pos},
           {"tol_rot", c.ik.tol_rot},
           {"max_step", c.ik.max_step}}},
         {"anneal",
          {{"rounds", cfg.anneal.rounds},
           {"iters_per_round", cfg.anneal.iters_per_round},
           {"t0_factor", cfg.anneal.t0_factor},
           {"cooling", cfg.anneal.cooling},
           {"sigma", cfg.anneal.sigma},
           {"shrink", cfg.anneal.shrink},
           {"seed", cfg.anneal.seed},
           {"tied", cfg.anneal.tied}}}};
  if (cfg.inertia || cfg.passive_damping) {
    json d = json::object();
    if (cfg.inertia) d["inertia"] = to_std(*cfg.inertia);
    if (cfg.passive_damping) d["passive_damping"] = to_std(*cfg.passive_damping);
    j["dynamics"] = d;
  }
  if (cfg.init) j["init"] = pd_to_json(*cfg.init);
  if (cfg.range) j["range"] = range_to_json(*cfg.range);
  return j;
}

json sysid_result_to_json(const SysIdResult& r, std::uint64_t seed) {
  json history = json::array();
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    const auto& h = r.history[i];
    history.push_back(json{{"round", i + 1},
                           {"best", pd_to_json(h.best)},
                           {"best_loss", h.best_loss},
                           {"evals", h.evals},
                           {"range", range_to_json(h.range)}});
  }
  return json{
      {"schema_version", kConfigSchemaVersion},
      {"seed", seed},
      {"best", pd_to_json(r.best)},
      {"initial_loss", r.initial_loss},
      {"final_losses", {{"transl", r.best_losses.transl}, {"rot", r.best_losses.rot}, {"sysid", r.best_losses.total}}},
      {"history", history}};
}

}  // namespace realsim::io
