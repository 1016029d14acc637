#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fuchsim/component_url.hpp"
#include "fuchsim/manifest.hpp"
#include "fuchsim/moniker.hpp"

namespace fuchsim::topology {

enum class LifecycleState { kCreated, kStarted, kStopped, kDestroyed, kPurged };
enum class LifecycleEvent { kStart, kStop, kDestroy, kPurge };

const std::string& lifecycle_state_name(LifecycleState s);
const std::string& lifecycle_event_name(LifecycleEvent e);

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResolveFailureError : public TopologyError {
 public:
  explicit ResolveFailureError(const std::string& url)
      : TopologyError("failed to resolve component url '" + url + "'") {}
};

class CycleDetectedError : public TopologyError {
 public:
  using TopologyError::TopologyError;
};

class NoSuchInstanceError : public TopologyError {
 public:
  explicit NoSuchInstanceError(const std::string& moniker)
      : TopologyError("no instance at moniker '" + moniker + "'") {}
};

class NoSuchCollectionError : public TopologyError {
 public:
  using TopologyError::TopologyError;
};

class ParentNotStartedError : public TopologyError {
 public:
  using TopologyError::TopologyError;
};

class DuplicateChildError : public TopologyError {
 public:
  using TopologyError::TopologyError;
};

class IllegalTransitionError : public TopologyError {
 public:
  IllegalTransitionError(LifecycleState from, LifecycleEvent event)
      : TopologyError("illegal transition: " + lifecycle_state_name(from) +
                      " + " + lifecycle_event_name(event)),
        from_(from),
        event_(event) {}
  LifecycleState from() const { return from_; }
  LifecycleEvent event() const { return event_; }

 private:
  LifecycleState from_;
  LifecycleEvent event_;
};

/// Resolves a component URL to its manifest. Returning nullopt means the
/// URL is unknown.
using ManifestResolver =
    std::function<std::optional<manifest::ComponentManifest>(
        const std::string& url)>;

class ComponentInstance {
 public:
  ComponentInstance(Moniker moniker, std::string url,
                    manifest::ComponentManifest manifest)
      : moniker_(std::move(moniker)),
        url_(std::move(url)),
        manifest_(std::move(manifest)) {}

  const Moniker& moniker() const { return moniker_; }
  const std::string& url() const { return url_; }
  const manifest::ComponentManifest& manifest() const { return manifest_; }
  LifecycleState state() const { return state_; }
  bool persisted() const { return persisted_; }

  /// Collection this instance was created into, if dynamic.
  const std::optional<std::string>& collection() const { return collection_; }

  const std::vector<std::unique_ptr<ComponentInstance>>& children() const {
    return children_;
  }
  ComponentInstance* find_child(std::string_view segment) const;

 private:
  friend class ComponentInstanceTree;

  Moniker moniker_;
  std::string url_;
  manifest::ComponentManifest manifest_;
  LifecycleState state_ = LifecycleState::kCreated;
  bool persisted_ = false;
  std::optional<std::string> collection_;
  std::vector<std::unique_ptr<ComponentInstance>> children_;
};

/// Runtime topology. Static children come from manifests at build time;
/// dynamic children join declared collections at runtime. Stop/destroy
/// cascade depth-first so no descendant outlives its parent.
class ComponentInstanceTree {
 public:
  /// Instantiates the root and all static children recursively, each in
  /// state Created, children in manifest order. A URL repeating on its
  /// own ancestor chain past `depth_limit` raises CycleDetectedError.
  static ComponentInstanceTree build(const ComponentUrl& root_url,
                                     ManifestResolver resolver,
                                     size_t depth_limit = 64);

  const ComponentInstance* root() const { return root_.get(); }
  ComponentInstance* find(const Moniker& m);
  const ComponentInstance* find(const Moniker& m) const;

  /// Instance count, root included.
  size_t size() const;

  /// Depth-first monikers, children in manifest/creation order.
  std::vector<Moniker> monikers() const;

  Moniker create_dynamic_child(const Moniker& parent,
                               const std::string& collection,
                               const manifest::ChildDecl& child);

  LifecycleState transition(const Moniker& m, LifecycleEvent event);

  /// The sub-tree rooted at m, inclusive.
  std::vector<Moniker> realm_of(const Moniker& m) const;

  bool has_persisted_record(const Moniker& m) const {
    return persisted_records_.count(m.render()) != 0;
  }
  bool has_destroyed_record(const Moniker& m) const {
    return destroyed_.count(m.render()) != 0;
  }

  /// One line per instance: `<moniker> <state> <url>`, depth-first.
  std::string render() const;

 private:
  ComponentInstanceTree() = default;

  static std::unique_ptr<ComponentInstance> instantiate(
      const Moniker& moniker, const std::string& url,
      const ManifestResolver& resolver, std::vector<std::string>& url_chain,
      size_t depth_limit);

  void stop_subtree(ComponentInstance& inst);
  void record_destroyed_subtree(ComponentInstance& inst);

  std::unique_ptr<ComponentInstance> root_;
  ManifestResolver resolver_;
  size_t depth_limit_ = 64;
  std::set<std::string> persisted_records_;  // keyed by rendered moniker
  std::set<std::string> destroyed_;          // instances awaiting purge
};

}  // namespace fuchsim::topology
