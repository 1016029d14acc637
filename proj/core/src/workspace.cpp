#include "fuchsim/workspace.hpp"

#include <fstream>
#include <sstream>

#include "fuchsim/json5.hpp"

namespace fuchsim::workspace {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw WorkspaceError("cannot read '" + p.string() + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string require_string(const json5::Value& v, const char* what) {
  if (!v.is_string())
    throw WorkspaceError(std::string(what) + " must be a string");
  return v.as_string();
}

}  // namespace

WorkspaceConfig WorkspaceConfig::load(const fs::path& file) {
  WorkspaceConfig config;
  config.base_dir = file.has_parent_path() ? file.parent_path() : fs::path(".");

  json5::Value doc = [&] {
    try {
      return json5::parse(read_text(file));
    } catch (const json5::ParseError& e) {
      throw WorkspaceError("workspace '" + file.string() +
                           "': " + e.what());
    }
  }();
  if (!doc.is_object())
    throw WorkspaceError("workspace document must be an object");

  for (const auto& [key, val] : doc.members()) {
    if (key == "root") {
      config.root_url = require_string(val, "root");
    } else if (key == "manifests") {
      if (!val.is_array())
        throw WorkspaceError("manifests must be an array");
      for (const json5::Value& entry : val.elements()) {
        if (!entry.is_object())
          throw WorkspaceError("manifest mapping must be an object");
        const json5::Value* url = entry.find("url");
        const json5::Value* rel = entry.find("file");
        if (!url || !rel)
          throw WorkspaceError("manifest mapping requires url and file");
        config.manifests[require_string(*url, "url")] =
            config.base_dir / require_string(*rel, "file");
      }
    } else if (key == "include_roots") {
      if (!val.is_array())
        throw WorkspaceError("include_roots must be an array");
      for (const json5::Value& entry : val.elements())
        config.include_roots.push_back(config.base_dir /
                                       require_string(entry, "include root"));
    } else {
      throw WorkspaceError("unknown workspace key '" + key + "'");
    }
  }
  if (config.root_url.empty())
    throw WorkspaceError("workspace names no root component url");

  // Everything referenced must exist now; failures surface at load time.
  for (const auto& [url, path] : config.manifests) {
    if (!fs::exists(path))
      throw WorkspaceError("manifest file '" + path.string() +
                           "' does not exist");
  }
  for (const fs::path& root : config.include_roots) {
    if (!fs::exists(root))
      throw WorkspaceError("include root '" + root.string() +
                           "' does not exist");
  }
  return config;
}

manifest::IncludeLoader make_include_loader(const WorkspaceConfig& config) {
  std::vector<fs::path> roots = config.include_roots;
  roots.push_back(config.base_dir);
  return [roots](const std::string& include) -> std::optional<std::string> {
    for (const fs::path& root : roots) {
      fs::path candidate = root / include;
      if (fs::exists(candidate)) return read_text(candidate);
    }
    return std::nullopt;
  };
}

topology::ManifestResolver make_resolver(const WorkspaceConfig& config) {
  auto manifests = config.manifests;
  auto loader = make_include_loader(config);
  return [manifests, loader](const std::string& url)
             -> std::optional<manifest::ComponentManifest> {
    auto it = manifests.find(url);
    if (it == manifests.end()) return std::nullopt;
    manifest::ComponentManifest m = manifest::parse_manifest(read_text(it->second));
    return manifest::merge_includes(m, loader);
  };
}

topology::ComponentInstanceTree build_tree(const WorkspaceConfig& config) {
  return topology::ComponentInstanceTree::build(
      topology::ComponentUrl::parse(config.root_url), make_resolver(config));
}

}  // namespace fuchsim::workspace
