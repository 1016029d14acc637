#include "fuchsim/topology.hpp"

#include <algorithm>
#include <sstream>

namespace fuchsim::topology {

const std::string& lifecycle_state_name(LifecycleState s) {
  static const std::string names[] = {"Created", "Started", "Stopped",
                                      "Destroyed", "Purged"};
  return names[static_cast<int>(s)];
}

const std::string& lifecycle_event_name(LifecycleEvent e) {
  static const std::string names[] = {"start", "stop", "destroy", "purge"};
  return names[static_cast<int>(e)];
}

ComponentInstance* ComponentInstance::find_child(
    std::string_view segment) const {
  for (const auto& child : children_) {
    if (child->moniker().leaf_name() == segment) return child.get();
  }
  return nullptr;
}

std::unique_ptr<ComponentInstance> ComponentInstanceTree::instantiate(
    const Moniker& moniker, const std::string& url,
    const ManifestResolver& resolver, std::vector<std::string>& url_chain,
    size_t depth_limit) {
  bool repeated =
      std::find(url_chain.begin(), url_chain.end(), url) != url_chain.end();
  if (repeated && url_chain.size() >= depth_limit) {
    throw CycleDetectedError("component url '" + url +
                             "' repeats on its own ancestor chain at depth " +
                             std::to_string(url_chain.size()));
  }
  std::optional<manifest::ComponentManifest> m = resolver(url);
  if (!m) throw ResolveFailureError(url);

  auto inst = std::make_unique<ComponentInstance>(moniker, url, std::move(*m));
  url_chain.push_back(url);
  for (const manifest::ChildDecl& child : inst->manifest().children) {
    inst->children_.push_back(instantiate(moniker.child(child.name), child.url,
                                          resolver, url_chain, depth_limit));
  }
  url_chain.pop_back();
  return inst;
}

ComponentInstanceTree ComponentInstanceTree::build(const ComponentUrl& root_url,
                                                   ManifestResolver resolver,
                                                   size_t depth_limit) {
  ComponentInstanceTree tree;
  tree.resolver_ = std::move(resolver);
  tree.depth_limit_ = depth_limit;
  std::vector<std::string> chain;
  tree.root_ = instantiate(Moniker::root(), root_url.render(), tree.resolver_,
                           chain, depth_limit);
  return tree;
}

ComponentInstance* ComponentInstanceTree::find(const Moniker& m) {
  if (!root_) return nullptr;
  ComponentInstance* cur = root_.get();
  for (const std::string& seg : m.segments()) {
    cur = cur->find_child(seg);
    if (!cur) return nullptr;
  }
  return cur;
}

const ComponentInstance* ComponentInstanceTree::find(const Moniker& m) const {
  return const_cast<ComponentInstanceTree*>(this)->find(m);
}

namespace {

void collect(const ComponentInstance& inst, std::vector<Moniker>& out) {
  out.push_back(inst.moniker());
  for (const auto& child : inst.children()) collect(*child, out);
}

}  // namespace

size_t ComponentInstanceTree::size() const {
  return root_ ? monikers().size() : 0;
}

std::vector<Moniker> ComponentInstanceTree::monikers() const {
  std::vector<Moniker> out;
  if (root_) collect(*root_, out);
  return out;
}

Moniker ComponentInstanceTree::create_dynamic_child(
    const Moniker& parent, const std::string& collection,
    const manifest::ChildDecl& child) {
  ComponentInstance* p = find(parent);
  if (!p) throw NoSuchInstanceError(parent.render());
  if (p->state() != LifecycleState::kStarted)
    throw ParentNotStartedError("parent '" + parent.render() +
                                "' is not started");
  bool declared = std::any_of(
      p->manifest().collections.begin(), p->manifest().collections.end(),
      [&](const manifest::CollectionDecl& c) { return c.name == collection; });
  if (!declared)
    throw NoSuchCollectionError("collection '" + collection +
                                "' not declared by '" + parent.render() + "'");
  std::string segment = collection + ":" + child.name;
  if (p->find_child(segment))
    throw DuplicateChildError("child '" + segment + "' already exists under '" +
                              parent.render() + "'");

  Moniker moniker = parent.child(segment);
  // Ancestor URLs seed the chain so dynamic recursion obeys the same limit.
  std::vector<std::string> chain;
  const ComponentInstance* walk = root_.get();
  chain.push_back(walk->url());
  for (const std::string& seg : parent.segments()) {
    walk = walk->find_child(seg);
    chain.push_back(walk->url());
  }
  auto inst =
      instantiate(moniker, child.url, resolver_, chain, depth_limit_);
  inst->collection_ = collection;
  ComponentInstance* raw = inst.get();
  p->children_.push_back(std::move(inst));
  return raw->moniker();
}

void ComponentInstanceTree::stop_subtree(ComponentInstance& inst) {
  for (auto& child : inst.children_) stop_subtree(*child);
  if (inst.state_ == LifecycleState::kStarted) {
    inst.state_ = LifecycleState::kStopped;
    inst.persisted_ = true;
    persisted_records_.insert(inst.moniker().render());
  }
}

void ComponentInstanceTree::record_destroyed_subtree(ComponentInstance& inst) {
  for (auto& child : inst.children_) record_destroyed_subtree(*child);
  if (inst.state_ == LifecycleState::kStarted) {
    // Children must not outlive the parent: force the stop so the
    // persisted snapshot exists, then tear down.
    inst.state_ = LifecycleState::kStopped;
    inst.persisted_ = true;
    persisted_records_.insert(inst.moniker().render());
  }
  inst.state_ = LifecycleState::kDestroyed;
  destroyed_.insert(inst.moniker().render());
}

LifecycleState ComponentInstanceTree::transition(const Moniker& m,
                                                 LifecycleEvent event) {
  ComponentInstance* inst = find(m);
  if (!inst) {
    std::string key = m.render();
    if (destroyed_.count(key)) {
      if (event == LifecycleEvent::kPurge) {
        destroyed_.erase(key);
        persisted_records_.erase(key);
        return LifecycleState::kPurged;
      }
      throw IllegalTransitionError(LifecycleState::kDestroyed, event);
    }
    throw NoSuchInstanceError(key);
  }

  switch (event) {
    case LifecycleEvent::kStart:
      if (inst->state_ == LifecycleState::kCreated ||
          inst->state_ == LifecycleState::kStopped) {
        inst->state_ = LifecycleState::kStarted;
        return inst->state_;
      }
      break;
    case LifecycleEvent::kStop:
      if (inst->state_ == LifecycleState::kStarted) {
        stop_subtree(*inst);
        return inst->state_;
      }
      break;
    case LifecycleEvent::kDestroy:
      if (inst->state_ == LifecycleState::kCreated ||
          inst->state_ == LifecycleState::kStopped) {
        record_destroyed_subtree(*inst);
        // Unlink the subtree; persisted records survive until purge.
        if (inst == root_.get()) {
          root_.reset();
        } else {
          ComponentInstance* parent = find(m.parent());
          auto& siblings = parent->children_;
          siblings.erase(std::find_if(siblings.begin(), siblings.end(),
                                      [&](const auto& c) {
                                        return c.get() == inst;
                                      }));
        }
        return LifecycleState::kDestroyed;
      }
      break;
    case LifecycleEvent::kPurge:
      break;  // only destroyed records can be purged
  }
  throw IllegalTransitionError(inst->state_, event);
}

std::vector<Moniker> ComponentInstanceTree::realm_of(const Moniker& m) const {
  const ComponentInstance* inst = find(m);
  if (!inst) throw NoSuchInstanceError(m.render());
  std::vector<Moniker> out;
  collect(*inst, out);
  return out;
}

namespace {

void render_instance(const ComponentInstance& inst, std::ostringstream& os) {
  os << inst.moniker().render() << " " << lifecycle_state_name(inst.state())
     << " " << inst.url() << "\n";
  for (const auto& child : inst.children()) render_instance(*child, os);
}

}  // namespace

std::string ComponentInstanceTree::render() const {
  std::ostringstream os;
  if (root_) render_instance(*root_, os);
  return os.str();
}

}  // namespace fuchsim::topology
