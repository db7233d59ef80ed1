#include "realsim/urdf.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <map>
#include <sstream>
#include <vector>

#include "realsim/errors.hpp"

namespace realsim {

namespace {

namespace pt = boost::property_tree;

struct RawJoint {
  std::string name;
  std::string type;
  std::string parent;
  std::string child;
  Pose origin;
  std::optional<Vec3> axis;
  std::optional<std::pair<double, double>> limit;
  std::string where;
};

std::vector<double> parse_numbers(const std::string& text, std::size_t count, const std::string& where) {
  std::istringstream in(text);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof() || out.size() != count) {
    throw InputError(where + ": expected " + std::to_string(count) + " numbers, got '" + text + "'");
  }
  return out;
}

double parse_number(const std::string& text, const std::string& where) { return parse_numbers(text, 1, where)[0]; }

RawJoint read_joint(const pt::ptree& node, std::size_t index) {
  RawJoint j;
  j.name = node.get<std::string>("<xmlattr>.name", "");
  j.where = "robot/joint[" + std::to_string(index) + "]" + (j.name.empty() ? "" : " '" + j.name + "'");
  if (j.name.empty()) throw InputError(j.where + ": missing name attribute");
  j.type = node.get<std::string>("<xmlattr>.type", "");
  if (j.type != "revolute" && j.type != "prismatic" && j.type != "fixed") {
    throw InputError(j.where + ": unsupported joint type '" + j.type + "'");
  }
  j.parent = node.get<std::string>("parent.<xmlattr>.link", "");
  j.child = node.get<std::string>("child.<xmlattr>.link", "");
  if (j.parent.empty() || j.child.empty()) throw InputError(j.where + ": missing <parent> or <child> link");

  if (auto origin = node.get_child_optional("origin")) {
    const auto xyz = parse_numbers(origin->get<std::string>("<xmlattr>.xyz", "0 0 0"), 3, j.where + "/origin@xyz");
    const auto rpy = parse_numbers(origin->get<std::string>("<xmlattr>.rpy", "0 0 0"), 3, j.where + "/origin@rpy");
    j.origin = Pose{Rot3::from_rpy(rpy[0], rpy[1], rpy[2]), Vec3(xyz[0], xyz[1], xyz[2])};
  }
  if (auto axis = node.get_child_optional("axis")) {
    const auto xyz = parse_numbers(axis->get<std::string>("<xmlattr>.xyz", ""), 3, j.where + "/axis@xyz");
    const Vec3 a(xyz[0], xyz[1], xyz[2]);
    if (!(a.norm() > 0.0)) throw InputError(j.where + "/axis: zero-length axis");
    j.axis = a.normalized();
  }
  if (auto limit = node.get_child_optional("limit")) {
    const auto lo = limit->get_optional<std::string>("<xmlattr>.lower");
    const auto hi = limit->get_optional<std::string>("<xmlattr>.upper");
    if (!lo || !hi) throw InputError(j.where + "/limit: lower and upper are required");
    j.limit = std::make_pair(parse_number(*lo, j.where + "/limit@lower"), parse_number(*hi, j.where + "/limit@upper"));
  }
  return j;
}

}  // namespace

ChainSpec parse_urdf_subset(std::string_view xml, const std::optional<std::string>& tip_link) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw InputError("URDF: malformed XML at line " + std::to_string(e.line()) + ": " + e.message());
  }
  const auto robot = doc.get_child_optional("robot");
  if (!robot) throw InputError("URDF: missing <robot> root element");

  std::vector<std::string> links;
  std::vector<RawJoint> joints;
  std::size_t joint_index = 0;
  for (const auto& [tag, node] : *robot) {
    if (tag == "link") {
      const auto name = node.get<std::string>("<xmlattr>.name", "");
      if (name.empty()) throw InputError("URDF: <link> without name");
      links.push_back(name);
    } else if (tag == "joint") {
      joints.push_back(read_joint(node, joint_index++));
    }
  }

  auto has_link = [&](const std::string& l) { return std::find(links.begin(), links.end(), l) != links.end(); };
  std::map<std::string, const RawJoint*> joint_by_child;
  std::map<std::string, int> child_count;
  for (const auto& j : joints) {
    if (!has_link(j.parent) || !has_link(j.child)) {
      throw InputError(j.where + ": references undeclared link");
    }
    if (!joint_by_child.emplace(j.child, &j).second) {
      throw InputError(j.where + ": link '" + j.child + "' has more than one parent joint");
    }
    ++child_count[j.parent];
  }

  std::string tip;
  if (tip_link) {
    if (!has_link(*tip_link)) throw InputError("URDF: tip link '" + *tip_link + "' not found");
    tip = *tip_link;
  } else {
    std::vector<std::string> leaves;
    for (const auto& l : links) {
      if (joint_by_child.count(l) && !child_count.count(l)) leaves.push_back(l);
    }
    if (leaves.size() != 1) throw InputError("unsupported: non-serial chain");
    tip = leaves.front();
  }

  // Walk tip -> root, then reverse.
  std::vector<const RawJoint*> path;
  for (std::string link = tip; joint_by_child.count(link);) {
    const RawJoint* j = joint_by_child.at(link);
    path.push_back(j);
    if (path.size() > joints.size()) throw InputError("URDF: kinematic loop detected");
    link = j->parent;
  }
  std::reverse(path.begin(), path.end());
  for (const RawJoint* j : path) {
    if (child_count[j->parent] > 1) throw InputError("unsupported: non-serial chain");
  }

  std::vector<JointSpec> out;
  Pose pending;
  for (const RawJoint* j : path) {
    if (j->type == "fixed") {
      pending = compose(pending, j->origin);
      continue;
    }
    JointSpec spec;
    spec.name = j->name;
    spec.kind = j->type == "revolute" ? JointKind::Revolute : JointKind::Prismatic;
    spec.origin = compose(pending, j->origin);
    pending = Pose::identity();
    if (j->axis) {
      spec.axis = *j->axis;
    } else if (spec.kind == JointKind::Revolute) {
      throw InputError(j->where + ": revolute joint is missing <axis>");
    } else {
      spec.axis = Vec3::UnitX();  // URDF default
    }
    if (!j->limit) throw InputError(j->where + ": missing <limit>");
    spec.lower = j->limit->first;
    spec.upper = j->limit->second;
    if (!(spec.lower <= spec.upper)) throw InputError(j->where + "/limit: lower exceeds upper");
    out.push_back(std::move(spec));
  }
  if (out.empty()) throw InputError("URDF: no movable joints between root and '" + tip + "'");
  return ChainSpec(std::move(out), pending);
}

}  // namespace realsim
