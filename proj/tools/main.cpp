#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fuchsim/dot_export.hpp"
#include "fuchsim/manifest.hpp"
#include "fuchsim/pkg.hpp"
#include "fuchsim/routing.hpp"
#include "fuchsim/sandbox.hpp"
#include "fuchsim/topology.hpp"
#include "fuchsim/workspace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIoError = 1;
constexpr int kExitBrokenOrInvalid = 2;
constexpr int kExitTampered = 3;

std::optional<std::string> read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int cmd_validate(const std::vector<std::string>& paths) {
  bool any_diagnostic = false;
  for (const std::string& path : paths) {
    std::optional<std::string> text = read_text(path);
    if (!text) {
      std::cerr << "error: cannot read '" << path << "'\n";
      return kExitIoError;
    }
    try {
      fuchsim::manifest::ComponentManifest m =
          fuchsim::manifest::parse_manifest(*text);
      for (const auto& diag : fuchsim::manifest::validate_manifest(m)) {
        std::cout << diag.render(path) << "\n";
        any_diagnostic = true;
      }
    } catch (const fuchsim::manifest::SyntaxError& e) {
      fuchsim::manifest::Diagnostic diag{"SyntaxError", "", e.pos(), e.what()};
      std::cout << diag.render(path) << "\n";
      any_diagnostic = true;
    } catch (const fuchsim::manifest::ManifestError& e) {
      fuchsim::manifest::Diagnostic diag{"ParseError", "", {}, e.what()};
      std::cout << diag.render(path) << "\n";
      any_diagnostic = true;
    }
  }
  return any_diagnostic ? kExitBrokenOrInvalid : kExitOk;
}

fuchsim::workspace::WorkspaceConfig load_workspace_or_exit(
    const std::string& path) {
  if (path.empty()) {
    std::cerr << "error: this command requires --workspace FILE\n";
    std::exit(kExitIoError);
  }
  try {
    return fuchsim::workspace::WorkspaceConfig::load(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(kExitIoError);
  }
}

fuchsim::topology::ComponentInstanceTree build_tree_or_exit(
    const fuchsim::workspace::WorkspaceConfig& config) {
  try {
    return fuchsim::workspace::build_tree(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(kExitIoError);
  }
}

int cmd_tree(const std::string& workspace) {
  auto config = load_workspace_or_exit(workspace);
  auto tree = build_tree_or_exit(config);
  std::cout << tree.render();
  return kExitOk;
}

bool parse_capability_arg(const std::string& arg,
                          fuchsim::manifest::CapabilityType& type,
                          std::string& name) {
  size_t slash = arg.find('/');
  if (slash == std::string::npos) return false;
  auto parsed = fuchsim::manifest::capability_type_from_name(arg.substr(0, slash));
  if (!parsed) return false;
  type = *parsed;
  name = arg.substr(slash + 1);
  return !name.empty();
}

int cmd_route(const std::string& workspace, const std::string& moniker_arg,
              const std::string& capability_arg) {
  auto config = load_workspace_or_exit(workspace);
  auto tree = build_tree_or_exit(config);

  fuchsim::routing::RouteRequest req;
  try {
    req.requester = fuchsim::topology::Moniker::parse(moniker_arg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  if (!parse_capability_arg(capability_arg, req.type, req.name)) {
    std::cerr << "error: capability must be <type>/<name>\n";
    return kExitIoError;
  }
  const fuchsim::topology::ComponentInstance* requester = tree.find(req.requester);
  if (!requester) {
    std::cerr << "error: no instance at '" << moniker_arg << "'\n";
    return kExitIoError;
  }
  for (const auto& use : requester->manifest().uses) {
    if (use.type == req.type && use.name == req.name) {
      req.requested_rights = use.rights;
      break;
    }
  }

  fuchsim::routing::RouteOutcome outcome =
      fuchsim::routing::resolve_route(tree, req);
  if (!outcome.ok()) {
    const auto& err = *outcome.error;
    std::cerr << "route failed: "
              << fuchsim::routing::route_error_kind_name(err.kind) << " at "
              << err.at.render() << "\n";
    return kExitBrokenOrInvalid;
  }
  const auto& result = *outcome.result;
  for (size_t i = 0; i < result.hops.size(); i++) {
    const auto& hop = result.hops[i];
    std::cout << (i + 1) << ". " << hop.at.render() << " "
              << fuchsim::routing::decl_kind_name(hop.kind) << " " << hop.name
              << "\n";
  }
  return kExitOk;
}

int cmd_route_all(const std::string& workspace, const std::string& dot_path) {
  auto config = load_workspace_or_exit(workspace);
  auto tree = build_tree_or_exit(config);
  std::vector<fuchsim::routing::RouteEntry> entries =
      fuchsim::routing::route_all(tree);

  bool any_broken = false;
  for (const auto& entry : entries) {
    std::cout << entry.request.requester.render() << " "
              << fuchsim::manifest::capability_type_name(entry.request.type)
              << "/" << entry.request.name << " -> ";
    if (entry.outcome.ok()) {
      std::cout << entry.outcome.result->provider.render() << "\n";
    } else {
      std::cout << "ERROR "
                << fuchsim::routing::route_error_kind_name(
                       entry.outcome.error->kind)
                << "\n";
      any_broken = true;
    }
  }
  if (!dot_path.empty()) {
    std::ofstream out(dot_path, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "error: cannot write '" << dot_path << "'\n";
      return kExitIoError;
    }
    out << fuchsim::routing::export_dot(tree, entries);
  }
  return any_broken ? kExitBrokenOrInvalid : kExitOk;
}

int cmd_ns(const std::string& workspace, const std::string& moniker_arg) {
  auto config = load_workspace_or_exit(workspace);
  auto tree = build_tree_or_exit(config);
  fuchsim::topology::Moniker moniker;
  try {
    moniker = fuchsim::topology::Moniker::parse(moniker_arg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  if (!tree.find(moniker)) {
    std::cerr << "error: no instance at '" << moniker_arg << "'\n";
    return kExitIoError;
  }
  auto routes = fuchsim::routing::route_all(tree);
  fuchsim::sandbox::ProviderRegistry registry;
  fuchsim::sandbox::Namespace ns =
      fuchsim::sandbox::build_namespace(tree, moniker, routes, registry);
  std::cout << ns.render();
  return kExitOk;
}

int cmd_pkg_build(const std::string& dir, const std::string& name,
                  const std::string& version) {
  try {
    fuchsim::pkg::build_package_dir(dir, name, version);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
}

int cmd_pkg_verify(const std::string& dir) {
  try {
    fuchsim::pkg::VerifyReport report = fuchsim::pkg::verify_package_dir(dir);
    for (const auto& issue : report.issues)
      std::cout << "MISMATCH " << issue.path << "\n";
    return report.ok ? kExitOk : kExitTampered;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Component-model workbench: manifests, topology, capability "
               "routing, namespaces, and package integrity"};
  app.require_subcommand(1);

  std::string workspace;
  app.add_option("--workspace", workspace, "Workspace config file");

  std::vector<std::string> validate_paths;
  CLI::App* validate = app.add_subcommand("validate", "Validate manifests");
  validate->add_option("paths", validate_paths, "Manifest files")->required();

  CLI::App* tree = app.add_subcommand("tree", "Print the instance tree");

  std::string route_moniker, route_capability;
  CLI::App* route = app.add_subcommand("route", "Resolve one capability route");
  route->add_option("moniker", route_moniker, "Requesting instance")->required();
  route->add_option("capability", route_capability, "<type>/<name>")->required();

  std::string dot_path;
  CLI::App* route_all = app.add_subcommand("route-all", "Resolve every use");
  route_all->add_option("--dot", dot_path, "Write a DOT graph to FILE");

  std::string ns_moniker;
  CLI::App* ns = app.add_subcommand("ns", "Print a component's namespace");
  ns->add_option("moniker", ns_moniker, "Instance moniker")->required();

  CLI::App* pkg = app.add_subcommand("pkg", "Package operations");
  pkg->require_subcommand(1);
  std::string pkg_dir, pkg_name, pkg_version;
  CLI::App* pkg_build = pkg->add_subcommand("build", "Write meta/ in place");
  pkg_build->add_option("dir", pkg_dir, "Package directory")->required();
  pkg_build->add_option("--name", pkg_name, "Package name")->required();
  pkg_build->add_option("--version", pkg_version, "Package version")->required();
  std::string verify_dir;
  CLI::App* pkg_verify = pkg->add_subcommand("verify", "Verify merkle roots");
  pkg_verify->add_option("dir", verify_dir, "Package directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitIoError;
  }

  if (validate->parsed()) return cmd_validate(validate_paths);
  if (tree->parsed()) return cmd_tree(workspace);
  if (route->parsed()) return cmd_route(workspace, route_moniker, route_capability);
  if (route_all->parsed()) return cmd_route_all(workspace, dot_path);
  if (ns->parsed()) return cmd_ns(workspace, ns_moniker);
  if (pkg->parsed()) {
    if (pkg_build->parsed()) return cmd_pkg_build(pkg_dir, pkg_name, pkg_version);
    if (pkg_verify->parsed()) return cmd_pkg_verify(verify_dir);
  }
  return kExitIoError;
}
