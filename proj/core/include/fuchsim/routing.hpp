#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fuchsim/topology.hpp"

namespace fuchsim::routing {

using manifest::CapabilityDecl;
using manifest::CapabilityType;
using manifest::OfferDecl;
using manifest::RightsSet;
using topology::ComponentInstanceTree;
using topology::Moniker;

enum class DeclKind { kUse, kOffer, kExpose };

const std::string& decl_kind_name(DeclKind k);

struct RouteRequest {
  Moniker requester;
  CapabilityType type = CapabilityType::kProtocol;
  std::string name;
  std::optional<RightsSet> requested_rights;
};

/// One declaration traversed while walking the tree.
struct RouteHop {
  Moniker at;
  DeclKind kind = DeclKind::kUse;
  CapabilityType type = CapabilityType::kProtocol;
  std::string name;

  friend bool operator==(const RouteHop&, const RouteHop&) = default;
};

struct RouteResult {
  Moniker provider;
  std::vector<RouteHop> hops;
  /// Intersection of every rights annotation on the chain, capability
  /// declaration included; set for directory/storage requests only.
  std::optional<RightsSet> effective_rights;
  /// The declaration the terminal `from: "self"` hop resolved to.
  CapabilityDecl capability;
  /// Non-fatal findings, e.g. MultipleMatches tie-breaks.
  std::vector<std::string> warnings;
};

enum class RouteErrorKind {
  kNoUseDecl,
  kRouteBroken,
  kRouteBrokenAtRoot,
  kTypeMismatch,
  kRightsEscalation,
  kNoCapabilityDecl,
};

const std::string& route_error_kind_name(RouteErrorKind k);

struct RouteError {
  RouteErrorKind kind = RouteErrorKind::kRouteBroken;
  Moniker at;
  /// For kRouteBroken: which declaration kind was missing.
  DeclKind missing = DeclKind::kOffer;
  std::optional<RightsSet> requested;  // kRightsEscalation
  std::optional<RightsSet> effective;  // kRightsEscalation
  std::string message;
};

struct RouteOutcome {
  std::optional<RouteResult> result;
  std::optional<RouteError> error;

  bool ok() const { return result.has_value(); }
};

/// Walks the tree the way the component manager does. Phase UP: at each
/// component receiving the request from child C, an offer matching
/// (type, name) whose targets cover C decides the next step — from self
/// terminates at a local capability declaration, from parent recurses
/// upward, from #child switches downward. Phase DOWN follows expose
/// declarations until one terminates at self. An offer targeting a
/// collection covers every dynamic child in it.
RouteOutcome resolve_route(const ComponentInstanceTree& tree,
                           const RouteRequest& req);

struct RouteEntry {
  RouteRequest request;
  RouteOutcome outcome;
};

/// One entry per use declaration in every instance, depth-first. The
/// requested rights of each entry are the use declaration's rights.
std::vector<RouteEntry> route_all(const ComponentInstanceTree& tree);

class NotACollectionMemberError : public std::runtime_error {
 public:
  explicit NotACollectionMemberError(const std::string& moniker)
      : std::runtime_error("'" + moniker + "' is not a collection member") {}
};

/// Offers in the parent that target m's collection; during routing these
/// behave exactly as if they targeted m directly.
std::vector<OfferDecl> collection_offers(const ComponentInstanceTree& tree,
                                         const Moniker& m);

}  // namespace fuchsim::routing
