#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "corpus.hpp"
#include "fuchsim/pkg.hpp"
#include "fuchsim/routing.hpp"
#include "fuchsim/sandbox.hpp"
#include "fuchsim/workspace.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

std::string cli_path() {
  const char* env = std::getenv("FUCHSIM_CLI");
  REQUIRE_MESSAGE(env != nullptr, "FUCHSIM_CLI must point at the binary");
  return env;
}

RunResult run(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  size_t n;
  while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0)
    result.stdout_text.append(buffer, n);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

/// Writes the routing-figure workspace (inert root above A) and returns
/// the workspace file path.
fs::path figure_workspace(const fs::path& dir) {
  write_file(dir / "root.cml", R"({
      children: [ { name: "A", url: "fuchsia-pkg://test/A#meta/A.cml" } ],
  })");
  write_file(dir / "A.cml", R"({
      children: [
          { name: "B", url: "fuchsia-pkg://test/B#meta/B.cml" },
          { name: "C", url: "fuchsia-pkg://test/C#meta/C.cml" },
      ],
      offer: [ { service: "S", from: "#B", to: [ "#C" ] } ],
  })");
  write_file(dir / "B.cml", R"({
      children: [ { name: "F", url: "fuchsia-pkg://test/F#meta/F.cml" } ],
      expose: [ { service: "S", from: "#F" } ],
  })");
  write_file(dir / "C.cml", R"({
      children: [ { name: "E", url: "fuchsia-pkg://test/E#meta/E.cml" } ],
      offer: [ { service: "S", from: "parent", to: [ "#E" ] } ],
  })");
  write_file(dir / "E.cml", R"({
      use: [ { service: "S" } ],
  })");
  write_file(dir / "F.cml", R"({
      capabilities: [ { service: "S" } ],
      expose: [ { service: "S", from: "self" } ],
  })");
  fs::path ws = dir / "workspace.json5";
  write_file(ws, R"({
      root: "fuchsia-pkg://test/root#meta/root.cml",
      manifests: [
          { url: "fuchsia-pkg://test/root#meta/root.cml", file: "root.cml" },
          { url: "fuchsia-pkg://test/A#meta/A.cml", file: "A.cml" },
          { url: "fuchsia-pkg://test/B#meta/B.cml", file: "B.cml" },
          { url: "fuchsia-pkg://test/C#meta/C.cml", file: "C.cml" },
          { url: "fuchsia-pkg://test/E#meta/E.cml", file: "E.cml" },
          { url: "fuchsia-pkg://test/F#meta/F.cml", file: "F.cml" },
      ],
  })");
  return ws;
}

}  // namespace

TEST_CASE("route subcommand prints the figure's five hops") {
  fs::path dir = fs::temp_directory_path() / "fuchsim_cli_fig";
  fs::remove_all(dir);
  fs::path ws = figure_workspace(dir);

  RunResult r = run("--workspace " + ws.string() + " route /A/C/E service/S");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text ==
        "1. /A/C/E use S\n"
        "2. /A/C offer S\n"
        "3. /A offer S\n"
        "4. /A/B expose S\n"
        "5. /A/B/F expose S\n");

  // The library resolves to the same provider the CLI prints hops for.
  auto config = fuchsim::workspace::WorkspaceConfig::load(ws);
  auto tree = fuchsim::workspace::build_tree(config);
  fuchsim::routing::RouteRequest req;
  req.requester = fuchsim::topology::Moniker::parse("/A/C/E");
  req.type = fuchsim::manifest::CapabilityType::kService;
  req.name = "S";
  auto outcome = fuchsim::routing::resolve_route(tree, req);
  REQUIRE(outcome.ok());
  CHECK(outcome.result->provider.render() == "/A/B/F");
  fs::remove_all(dir);
}

TEST_CASE("tree subcommand matches the library rendering") {
  fs::path dir = fs::temp_directory_path() / "fuchsim_cli_tree";
  fs::remove_all(dir);
  fs::path ws = figure_workspace(dir);

  RunResult r = run("--workspace " + ws.string() + " tree");
  CHECK(r.exit_code == 0);

  auto config = fuchsim::workspace::WorkspaceConfig::load(ws);
  auto tree = fuchsim::workspace::build_tree(config);
  CHECK(r.stdout_text == tree.render());
  CHECK(!r.stdout_text.empty());
  CHECK(r.stdout_text.back() == '\n');
  fs::remove_all(dir);
}

TEST_CASE("route-all writes a stable dot file and reports each use") {
  fs::path dir = fs::temp_directory_path() / "fuchsim_cli_dot";
  fs::remove_all(dir);
  fs::path ws = figure_workspace(dir);
  fs::path dot = dir / "g.dot";

  RunResult r1 = run("--workspace " + ws.string() + " route-all --dot " +
                     dot.string());
  CHECK(r1.exit_code == 0);
  CHECK(r1.stdout_text == "/A/C/E service/S -> /A/B/F\n");
  std::ifstream in1(dot);
  std::string first((std::istreambuf_iterator<char>(in1)),
                    std::istreambuf_iterator<char>());

  RunResult r2 = run("--workspace " + ws.string() + " route-all --dot " +
                     dot.string());
  CHECK(r2.exit_code == 0);
  std::ifstream in2(dot);
  std::string second((std::istreambuf_iterator<char>(in2)),
                     std::istreambuf_iterator<char>());
  CHECK(first == second);
  CHECK(first.find("label=\"4\"") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("validate subcommand: listings pass, dangling refs fail") {
  fs::path dir = fs::temp_directory_path() / "fuchsim_cli_validate";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // The offer/expose listings validate once their children are stubbed.
  std::string offer_with_child = std::string(corpus::kOfferDirectory);
  offer_with_child.insert(
      offer_with_child.rfind('}'),
      R"(, children: [ { name: "B", url: "fuchsia-pkg://r/b#meta/b.cml" } ],
         capabilities: [ { directory: "data", rights: ["r*"], path: "/d" } ] )");
  write_file(dir / "offer.cml", offer_with_child);
  write_file(dir / "cap.cml", corpus::kDirectoryCapability);
  write_file(dir / "use.cml", corpus::kUseDirectory);
  write_file(dir / "hello.cml", corpus::kHelloWorld);

  RunResult ok = run("validate " + (dir / "offer.cml").string() + " " +
                     (dir / "cap.cml").string() + " " +
                     (dir / "use.cml").string() + " " +
                     (dir / "hello.cml").string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.stdout_text.empty());

  write_file(dir / "dangling.cml", corpus::kOfferDirectory);
  RunResult bad = run("validate " + (dir / "dangling.cml").string());
  CHECK(bad.exit_code == 2);
  CHECK(bad.stdout_text.find("UnresolvedTargetRef") == 0);
  CHECK(bad.stdout_text.find("dangling.cml") != std::string::npos);

  RunResult missing = run("validate " + (dir / "absent.cml").string());
  CHECK(missing.exit_code == 1);
  fs::remove_all(dir);
}

TEST_CASE("ns subcommand prints mounts sorted by path") {
  fs::path dir = fs::temp_directory_path() / "fuchsim_cli_ns";
  fs::remove_all(dir);
  write_file(dir / "P.cml", R"({
      children: [ { name: "B", url: "fuchsia-pkg://test/B#meta/B.cml" } ],
      capabilities: [
          { directory: "data", rights: ["rw*"], path: "/published-data" },
      ],
      offer: [
          { directory: "data", rights: ["r*"], from: "self", to: [ "#B" ] },
      ],
  })");
  write_file(dir / "B.cml", R"({
      use: [ { directory: "data", rights: ["r*"], path: "/data" } ],
  })");
  fs::path ws = dir / "ws.json5";
  write_file(ws, R"({
      root: "fuchsia-pkg://test/P#meta/P.cml",
      manifests: [
          { url: "fuchsia-pkg://test/P#meta/P.cml", file: "P.cml" },
          { url: "fuchsia-pkg://test/B#meta/B.cml", file: "B.cml" },
      ],
  })");

  RunResult r = run("--workspace " + ws.string() + " ns /B");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text == "/data -> / [r*]\n");
  fs::remove_all(dir);
}

TEST_CASE("pkg subcommands: build then verify, tamper exits 3") {
  fs::path dir = fs::temp_directory_path() / "fuchsim_cli_pkg";
  fs::remove_all(dir);
  write_file(dir / "bin/app", "binary-bits");
  write_file(dir / "data/config", "key=value");

  RunResult built =
      run("pkg build " + dir.string() + " --name demo --version 1.2");
  CHECK(built.exit_code == 0);
  CHECK(fs::exists(dir / "meta/package"));
  CHECK(fs::exists(dir / "meta/contents"));

  RunResult verified = run("pkg verify " + dir.string());
  CHECK(verified.exit_code == 0);
  CHECK(verified.stdout_text.empty());

  // Flip one byte in one content file.
  {
    std::fstream f(dir / "data/config",
                   std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(0);
    f.put('K');
  }
  RunResult tampered = run("pkg verify " + dir.string());
  CHECK(tampered.exit_code == 3);
  CHECK(tampered.stdout_text == "MISMATCH data/config\n");
  fs::remove_all(dir);
}

TEST_CASE("broken route exits 2") {
  fs::path dir = fs::temp_directory_path() / "fuchsim_cli_broken";
  fs::remove_all(dir);
  fs::path ws = figure_workspace(dir);
  // Sever the offer at C.
  write_file(dir / "C.cml", R"({
      children: [ { name: "E", url: "fuchsia-pkg://test/E#meta/E.cml" } ],
  })");
  RunResult r = run("--workspace " + ws.string() + " route /A/C/E service/S");
  CHECK(r.exit_code == 2);
  RunResult r2 = run("--workspace " + ws.string() + " route-all");
  CHECK(r2.exit_code == 2);
  CHECK(r2.stdout_text == "/A/C/E service/S -> ERROR RouteBroken\n");
  fs::remove_all(dir);
}
