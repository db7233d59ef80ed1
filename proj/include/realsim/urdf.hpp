#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "realsim/chain.hpp"

namespace realsim {

/// Extracts the serial chain ending at `tip_link` from a URDF document.
///
/// Supported subset: <robot>, <link name>, and <joint> with type
/// revolute | prismatic | fixed and children <parent>, <child>, <origin xyz rpy>,
/// <axis xyz>, <limit lower upper>. Visual, collision and inertial elements are
/// ignored. Fixed joints are folded into the next movable joint's origin, or into
/// the tool offset when they trail the last movable joint.
///
/// Without a tip the whole tree must be a single unbranched chain.
/// Throws InputError for malformed XML, unknown joint types, missing required
/// elements, and branching along the requested path ("unsupported: non-serial chain").
ChainSpec parse_urdf_subset(std::string_view xml, const std::optional<std::string>& tip_link = {});

}  // namespace realsim
