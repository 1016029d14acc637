#include "fuchsim/routing.hpp"

#include <algorithm>

namespace fuchsim::routing {

using manifest::ExposeDecl;
using manifest::SourceRef;
using manifest::UseDecl;
using topology::ComponentInstance;

const std::string& decl_kind_name(DeclKind k) {
  static const std::string names[] = {"use", "offer", "expose"};
  return names[static_cast<int>(k)];
}

const std::string& route_error_kind_name(RouteErrorKind k) {
  static const std::string names[] = {
      "NoUseDecl",        "RouteBroken",      "RouteBrokenAtRoot",
      "TypeMismatch",     "RightsEscalation", "NoCapabilityDecl",
  };
  return names[static_cast<int>(k)];
}

namespace {

RouteOutcome fail(RouteError err) {
  RouteOutcome out;
  out.error = std::move(err);
  return out;
}

RouteError broken(const Moniker& at, DeclKind missing) {
  RouteError e;
  e.kind = RouteErrorKind::kRouteBroken;
  e.at = at;
  e.missing = missing;
  e.message = "no matching " + decl_kind_name(missing) + " at '" + at.render() +
              "'";
  return e;
}

RouteError type_mismatch(const Moniker& at, const std::string& name) {
  RouteError e;
  e.kind = RouteErrorKind::kTypeMismatch;
  e.at = at;
  e.message = "capability '" + name + "' at '" + at.render() +
              "' exists with a different type";
  return e;
}

/// True when the offer's target list covers the given child instance:
/// `#name` for a static child, the collection's `#name` for a dynamic one.
bool offer_covers(const OfferDecl& offer, const ComponentInstance& child) {
  std::string ref;
  if (child.collection()) {
    ref = "#" + *child.collection();
  } else {
    ref = "#" + child.moniker().leaf_name();
  }
  return std::find(offer.to.begin(), offer.to.end(), ref) != offer.to.end();
}

struct Walk {
  const ComponentInstanceTree& tree;
  CapabilityType type;
  std::string name;
  std::vector<RouteHop> hops;
  RightsSet rights_acc = RightsSet::all();
  std::vector<std::string> warnings;

  void note_rights(const std::optional<RightsSet>& annotation) {
    // Unannotated hops are transparent.
    if (annotation) rights_acc = rights_acc.intersect(*annotation);
  }

  RouteOutcome finish(const ComponentInstance& provider,
                      const CapabilityDecl& decl,
                      const std::optional<RightsSet>& requested) {
    note_rights(decl.rights);
    RouteResult result;
    result.provider = provider.moniker();
    result.hops = std::move(hops);
    result.capability = decl;
    result.warnings = std::move(warnings);
    bool carries_rights = type == CapabilityType::kDirectory ||
                          type == CapabilityType::kStorage;
    if (carries_rights) result.effective_rights = rights_acc;
    if (requested && carries_rights && !requested->subset_of(rights_acc)) {
      RouteError e;
      e.kind = RouteErrorKind::kRightsEscalation;
      e.at = provider.moniker();
      e.requested = requested;
      e.effective = rights_acc;
      e.message = "requested rights exceed the route's effective rights";
      return fail(std::move(e));
    }
    RouteOutcome out;
    out.result = std::move(result);
    return out;
  }

  /// Terminal step: the component names itself as the source, so a local
  /// capability declaration must back the route.
  RouteOutcome terminate_at(const ComponentInstance& node,
                            const std::optional<RightsSet>& requested) {
    const CapabilityDecl* match = nullptr;
    bool name_only = false;
    int matches = 0;
    for (const CapabilityDecl& d : node.manifest().capabilities) {
      if (d.name != name) continue;
      if (d.type != type) {
        name_only = true;
        continue;
      }
      matches++;
      if (!match) match = &d;
    }
    if (!match) {
      if (name_only) return fail(type_mismatch(node.moniker(), name));
      RouteError e;
      e.kind = RouteErrorKind::kNoCapabilityDecl;
      e.at = node.moniker();
      e.message = "'" + node.moniker().render() +
                  "' names itself as source but declares no capability '" +
                  name + "'";
      return fail(std::move(e));
    }
    if (matches > 1) {
      warnings.push_back("MultipleMatches capability '" + name + "' at '" +
                         node.moniker().render() + "'");
    }
    return finish(node, *match, requested);
  }

  RouteOutcome descend(const ComponentInstance& node,
                       const std::optional<RightsSet>& requested) {
    const ExposeDecl* match = nullptr;
    bool name_only = false;
    int matches = 0;
    for (const ExposeDecl& d : node.manifest().exposes) {
      if (d.name != name) continue;
      if (d.type != type) {
        name_only = true;
        continue;
      }
      matches++;
      if (!match) match = &d;
    }
    if (!match) {
      if (name_only) return fail(type_mismatch(node.moniker(), name));
      return fail(broken(node.moniker(), DeclKind::kExpose));
    }
    if (matches > 1) {
      warnings.push_back("MultipleMatches expose '" + name + "' at '" +
                         node.moniker().render() + "'");
    }
    hops.push_back({node.moniker(), DeclKind::kExpose, type, name});
    note_rights(match->rights);
    if (match->from.kind == SourceRef::Kind::kSelf)
      return terminate_at(node, requested);
    const ComponentInstance* child = node.find_child(match->from.child_name);
    if (!child) {
      return fail(
          broken(node.moniker().child(match->from.child_name), DeclKind::kExpose));
    }
    return descend(*child, requested);
  }

  RouteOutcome ascend(const ComponentInstance& node,
                      const ComponentInstance& from_child,
                      const std::optional<RightsSet>& requested) {
    const OfferDecl* match = nullptr;
    bool name_only = false;
    int matches = 0;
    for (const OfferDecl& d : node.manifest().offers) {
      if (d.name != name || !offer_covers(d, from_child)) continue;
      if (d.type != type) {
        name_only = true;
        continue;
      }
      matches++;
      if (!match) match = &d;
    }
    if (!match) {
      if (name_only) return fail(type_mismatch(node.moniker(), name));
      return fail(broken(node.moniker(), DeclKind::kOffer));
    }
    if (matches > 1) {
      warnings.push_back("MultipleMatches offer '" + name + "' at '" +
                         node.moniker().render() + "'");
    }
    hops.push_back({node.moniker(), DeclKind::kOffer, type, name});
    note_rights(match->rights);
    switch (match->from.kind) {
      case SourceRef::Kind::kSelf:
        return terminate_at(node, requested);
      case SourceRef::Kind::kParent: {
        if (node.moniker().is_root()) {
          RouteError e;
          e.kind = RouteErrorKind::kRouteBrokenAtRoot;
          e.at = node.moniker();
          e.message = "offer from parent at the tree root";
          return fail(std::move(e));
        }
        const ComponentInstance* parent =
            tree.find(node.moniker().parent());
        return ascend(*parent, node, requested);
      }
      case SourceRef::Kind::kChild: {
        const ComponentInstance* child =
            node.find_child(match->from.child_name);
        if (!child) {
          return fail(broken(node.moniker().child(match->from.child_name),
                             DeclKind::kExpose));
        }
        return descend(*child, requested);
      }
    }
    return fail(broken(node.moniker(), DeclKind::kOffer));
  }
};

}  // namespace

RouteOutcome resolve_route(const ComponentInstanceTree& tree,
                           const RouteRequest& req) {
  const ComponentInstance* requester = tree.find(req.requester);
  if (!requester)
    throw topology::NoSuchInstanceError(req.requester.render());

  Walk walk{tree, req.type, req.name, {}, RightsSet::all(), {}};

  const UseDecl* use = nullptr;
  bool name_only = false;
  int matches = 0;
  for (const UseDecl& d : requester->manifest().uses) {
    if (d.name != req.name) continue;
    if (d.type != req.type) {
      name_only = true;
      continue;
    }
    matches++;
    if (!use) use = &d;
  }
  if (!use) {
    RouteError e;
    e.kind = name_only ? RouteErrorKind::kTypeMismatch
                       : RouteErrorKind::kNoUseDecl;
    e.at = req.requester;
    e.message = name_only
                    ? "use of '" + req.name + "' has a different type"
                    : "'" + req.requester.render() + "' has no use of " +
                          manifest::capability_type_name(req.type) + " '" +
                          req.name + "'";
    return fail(std::move(e));
  }
  if (matches > 1) {
    walk.warnings.push_back("MultipleMatches use '" + req.name + "' at '" +
                            req.requester.render() + "'");
  }
  walk.hops.push_back(
      {req.requester, DeclKind::kUse, req.type, req.name});

  if (requester->moniker().is_root()) {
    RouteError e;
    e.kind = RouteErrorKind::kRouteBrokenAtRoot;
    e.at = req.requester;
    e.message = "use from parent at the tree root";
    return fail(std::move(e));
  }
  const ComponentInstance* parent = tree.find(req.requester.parent());
  return walk.ascend(*parent, *requester, req.requested_rights);
}

namespace {

void route_instance(const ComponentInstanceTree& tree,
                    const ComponentInstance& inst,
                    std::vector<RouteEntry>& out) {
  for (const UseDecl& use : inst.manifest().uses) {
    RouteRequest req;
    req.requester = inst.moniker();
    req.type = use.type;
    req.name = use.name;
    req.requested_rights = use.rights;
    out.push_back({req, resolve_route(tree, req)});
  }
  for (const auto& child : inst.children()) {
    route_instance(tree, *child, out);
  }
}

}  // namespace

std::vector<RouteEntry> route_all(const ComponentInstanceTree& tree) {
  std::vector<RouteEntry> out;
  if (tree.root()) route_instance(tree, *tree.root(), out);
  return out;
}

std::vector<OfferDecl> collection_offers(const ComponentInstanceTree& tree,
                                         const Moniker& m) {
  const ComponentInstance* inst = tree.find(m);
  if (!inst) throw topology::NoSuchInstanceError(m.render());
  if (!inst->collection()) throw NotACollectionMemberError(m.render());
  const ComponentInstance* parent = tree.find(m.parent());
  std::string ref = "#" + *inst->collection();
  std::vector<OfferDecl> out;
  for (const OfferDecl& d : parent->manifest().offers) {
    if (std::find(d.to.begin(), d.to.end(), ref) != d.to.end())
      out.push_back(d);
  }
  return out;
}

}  // namespace fuchsim::routing
