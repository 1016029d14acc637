#pragma once

#include "fuchsim/routing.hpp"

namespace fuchsim::routing {

/// Brute-force reference resolver: enumerates every declaration chain
/// rooted at the requester's use declaration and accepts the request iff
/// some chain reaches a capability declaration. Kept deliberately
/// independent of resolve_route so the two can check each other.
/// Precondition: tree holds at most 12 instances.
RouteOutcome oracle_resolve(const ComponentInstanceTree& tree,
                            const RouteRequest& req);

}  // namespace fuchsim::routing
