#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuchsim/topology.hpp"

namespace fuchsim::workspace {

class WorkspaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps component URLs to local manifest files. No network fetching:
/// everything a tree build needs is named here.
struct WorkspaceConfig {
  std::filesystem::path base_dir;
  std::string root_url;
  std::map<std::string, std::filesystem::path> manifests;  // url -> file
  std::vector<std::filesystem::path> include_roots;

  static WorkspaceConfig load(const std::filesystem::path& file);
};

/// Resolver backed by the workspace mapping; manifests are parsed and
/// their includes merged against the include roots.
topology::ManifestResolver make_resolver(const WorkspaceConfig& config);

/// Include loader over the workspace's include roots.
manifest::IncludeLoader make_include_loader(const WorkspaceConfig& config);

/// Convenience: build the instance tree for the workspace root.
topology::ComponentInstanceTree build_tree(const WorkspaceConfig& config);

}  // namespace fuchsim::workspace
