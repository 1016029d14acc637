#pragma once

#include <string>
#include <vector>

#include "fuchsim/routing.hpp"

namespace fuchsim::routing {

/// Deterministic DOT digraph of the instance tree with route overlays:
/// tree edges solid, resolved route hops dashed and numbered along the
/// chain, broken routes as a red dashed edge to the failure point.
std::string export_dot(const ComponentInstanceTree& tree,
                       const std::vector<RouteEntry>& results);

}  // namespace fuchsim::routing
