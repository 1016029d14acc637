#include "fuchsim/routing_oracle.hpp"

#include <algorithm>
#include <stdexcept>

// The oracle re-derives every matching rule from scratch: it explores all
// candidate declarations at each node (not just the first match) and
// collects complete chains, so agreement with resolve_route is evidence
// rather than tautology.

namespace fuchsim::routing {

namespace {

using manifest::CapabilityDecl;
using manifest::ExposeDecl;
using manifest::OfferDecl;
using manifest::SourceRef;
using manifest::UseDecl;
using topology::ComponentInstance;

struct Chain {
  std::vector<RouteHop> hops;
  const ComponentInstance* provider = nullptr;
  const CapabilityDecl* capability = nullptr;
  RightsSet rights = RightsSet::all();
};

struct Search {
  const ComponentInstanceTree& tree;
  CapabilityType type;
  std::string name;

  std::vector<Chain> complete;
  // Deepest point any partial chain stalled, and why.
  size_t best_depth = 0;
  RouteError deepest_error;
  bool have_error = false;

  void stall(size_t depth, RouteError err) {
    if (!have_error || depth > best_depth) {
      best_depth = depth;
      deepest_error = std::move(err);
      have_error = true;
    }
  }

  static RightsSet merge(RightsSet acc, const std::optional<RightsSet>& ann) {
    return ann ? acc.intersect(*ann) : acc;
  }

  bool child_ref_matches(const std::string& ref,
                         const ComponentInstance& child) {
    if (child.collection()) return ref == "#" + *child.collection();
    return ref == "#" + child.moniker().leaf_name();
  }

  void try_terminal(const ComponentInstance& node, Chain chain) {
    bool saw_name = false;
    bool found = false;
    for (const CapabilityDecl& d : node.manifest().capabilities) {
      if (d.name != name) continue;
      saw_name = true;
      if (d.type != type) continue;
      Chain done = chain;
      done.provider = &node;
      done.capability = &d;
      done.rights = merge(done.rights, d.rights);
      complete.push_back(std::move(done));
      found = true;
    }
    if (found) return;
    RouteError e;
    if (saw_name) {
      e.kind = RouteErrorKind::kTypeMismatch;
    } else {
      e.kind = RouteErrorKind::kNoCapabilityDecl;
    }
    e.at = node.moniker();
    stall(chain.hops.size(), std::move(e));
  }

  void walk_down(const ComponentInstance& node, Chain chain) {
    bool saw_name = false;
    bool advanced = false;
    for (const ExposeDecl& d : node.manifest().exposes) {
      if (d.name != name) continue;
      saw_name = true;
      if (d.type != type) continue;
      advanced = true;
      Chain next = chain;
      next.hops.push_back({node.moniker(), DeclKind::kExpose, type, name});
      next.rights = merge(next.rights, d.rights);
      if (d.from.kind == SourceRef::Kind::kSelf) {
        try_terminal(node, std::move(next));
      } else {
        const ComponentInstance* child = node.find_child(d.from.child_name);
        if (!child) {
          RouteError e;
          e.kind = RouteErrorKind::kRouteBroken;
          e.at = node.moniker().child(d.from.child_name);
          e.missing = DeclKind::kExpose;
          stall(next.hops.size(), std::move(e));
        } else {
          walk_down(*child, std::move(next));
        }
      }
    }
    if (!advanced) {
      RouteError e;
      e.kind = saw_name ? RouteErrorKind::kTypeMismatch
                        : RouteErrorKind::kRouteBroken;
      e.at = node.moniker();
      e.missing = DeclKind::kExpose;
      stall(chain.hops.size(), std::move(e));
    }
  }

  void walk_up(const ComponentInstance& node, const ComponentInstance& child,
               Chain chain) {
    bool saw_name = false;
    bool advanced = false;
    for (const OfferDecl& d : node.manifest().offers) {
      if (d.name != name) continue;
      bool covers = std::any_of(
          d.to.begin(), d.to.end(),
          [&](const std::string& ref) { return child_ref_matches(ref, child); });
      if (!covers) continue;
      saw_name = true;
      if (d.type != type) continue;
      advanced = true;
      Chain next = chain;
      next.hops.push_back({node.moniker(), DeclKind::kOffer, type, name});
      next.rights = merge(next.rights, d.rights);
      if (d.from.kind == SourceRef::Kind::kSelf) {
        try_terminal(node, std::move(next));
      } else if (d.from.kind == SourceRef::Kind::kParent) {
        if (node.moniker().is_root()) {
          RouteError e;
          e.kind = RouteErrorKind::kRouteBrokenAtRoot;
          e.at = node.moniker();
          stall(next.hops.size(), std::move(e));
        } else {
          walk_up(*tree.find(node.moniker().parent()), node, std::move(next));
        }
      } else {
        const ComponentInstance* source = node.find_child(d.from.child_name);
        if (!source) {
          RouteError e;
          e.kind = RouteErrorKind::kRouteBroken;
          e.at = node.moniker().child(d.from.child_name);
          e.missing = DeclKind::kExpose;
          stall(next.hops.size(), std::move(e));
        } else {
          walk_down(*source, std::move(next));
        }
      }
    }
    if (!advanced) {
      RouteError e;
      e.kind = saw_name ? RouteErrorKind::kTypeMismatch
                        : RouteErrorKind::kRouteBroken;
      e.at = node.moniker();
      e.missing = DeclKind::kOffer;
      stall(chain.hops.size(), std::move(e));
    }
  }
};

}  // namespace

RouteOutcome oracle_resolve(const ComponentInstanceTree& tree,
                            const RouteRequest& req) {
  if (tree.size() > 12)
    throw std::invalid_argument("oracle_resolve is limited to 12 instances");
  const ComponentInstance* requester = tree.find(req.requester);
  if (!requester)
    throw topology::NoSuchInstanceError(req.requester.render());

  Search search{tree, req.type, req.name, {}, 0, {}, false};

  bool saw_name = false;
  bool have_use = false;
  for (const UseDecl& d : requester->manifest().uses) {
    if (d.name != req.name) continue;
    saw_name = true;
    if (d.type != req.type) continue;
    have_use = true;
  }
  if (!have_use) {
    RouteOutcome out;
    RouteError e;
    e.kind = saw_name ? RouteErrorKind::kTypeMismatch
                      : RouteErrorKind::kNoUseDecl;
    e.at = req.requester;
    out.error = std::move(e);
    return out;
  }

  Chain seed;
  seed.hops.push_back({req.requester, DeclKind::kUse, req.type, req.name});
  if (requester->moniker().is_root()) {
    RouteOutcome out;
    RouteError e;
    e.kind = RouteErrorKind::kRouteBrokenAtRoot;
    e.at = req.requester;
    out.error = std::move(e);
    return out;
  }
  search.walk_up(*tree.find(req.requester.parent()), *requester,
                 std::move(seed));

  if (search.complete.empty()) {
    RouteOutcome out;
    out.error = search.have_error
                    ? search.deepest_error
                    : RouteError{RouteErrorKind::kRouteBroken, req.requester,
                                 DeclKind::kOffer, {}, {}, ""};
    return out;
  }

  // First complete chain in manifest-declaration order matches the
  // resolver's first-match tie-break.
  const Chain& chain = search.complete.front();
  RouteResult result;
  result.provider = chain.provider->moniker();
  result.hops = chain.hops;
  result.capability = *chain.capability;
  bool carries_rights = req.type == CapabilityType::kDirectory ||
                        req.type == CapabilityType::kStorage;
  if (carries_rights) result.effective_rights = chain.rights;
  if (req.requested_rights && carries_rights &&
      !req.requested_rights->subset_of(chain.rights)) {
    RouteOutcome out;
    RouteError e;
    e.kind = RouteErrorKind::kRightsEscalation;
    e.at = result.provider;
    e.requested = req.requested_rights;
    e.effective = chain.rights;
    out.error = std::move(e);
    return out;
  }
  RouteOutcome out;
  out.result = std::move(result);
  return out;
}

}  // namespace fuchsim::routing
