#include <benchmark/benchmark.h>

#include <random>

#include "fuchsim/pkg.hpp"
#include "fuchsim/routing.hpp"
#include "fuchsim/sandbox.hpp"
#include "testutil.hpp"

namespace {

// Deep chain: root offers from self down through n forwarding nodes to a
// leaf that uses the protocol.
fuchsim::topology::ComponentInstanceTree chain_tree(size_t depth) {
  using namespace fuchsim::manifest;
  std::map<std::string, ComponentManifest> m;

  ComponentManifest root;
  CapabilityDecl cap;
  cap.type = CapabilityType::kProtocol;
  cap.name = "svc";
  root.capabilities.push_back(cap);
  OfferDecl offer;
  offer.type = CapabilityType::kProtocol;
  offer.name = "svc";
  offer.from = SourceRef::self();
  offer.to = {"#h0"};
  root.offers.push_back(offer);
  root.children.push_back({"h0", testutil::url_of("h0"), {}});
  m["root"] = root;

  for (size_t i = 0; i < depth; i++) {
    ComponentManifest hop;
    std::string next = "h" + std::to_string(i + 1);
    if (i + 1 < depth) {
      hop.children.push_back({next, testutil::url_of(next), {}});
      OfferDecl fwd;
      fwd.type = CapabilityType::kProtocol;
      fwd.name = "svc";
      fwd.from = SourceRef::parent();
      fwd.to = {"#" + next};
      hop.offers.push_back(fwd);
    } else {
      UseDecl use;
      use.type = CapabilityType::kProtocol;
      use.name = "svc";
      hop.uses.push_back(use);
    }
    m["h" + std::to_string(i)] = hop;
  }
  return testutil::make_tree(m, "root");
}

void BM_resolve_route_chain(benchmark::State& state) {
  size_t depth = static_cast<size_t>(state.range(0));
  auto tree = chain_tree(depth);
  fuchsim::routing::RouteRequest req;
  req.requester = tree.monikers().back();
  req.type = fuchsim::manifest::CapabilityType::kProtocol;
  req.name = "svc";
  for (auto _ : state) {
    auto outcome = fuchsim::routing::resolve_route(tree, req);
    benchmark::DoNotOptimize(outcome);
  }
}
BENCHMARK(BM_resolve_route_chain)->Arg(4)->Arg(16)->Arg(48);

void BM_merkle_root(benchmark::State& state) {
  std::vector<uint8_t> content(static_cast<size_t>(state.range(0)));
  std::mt19937_64 rng(1);
  for (auto& b : content) b = static_cast<uint8_t>(rng());
  for (auto _ : state) {
    auto root = fuchsim::pkg::merkle_root(std::span<const uint8_t>(content));
    benchmark::DoNotOptimize(root);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          state.range(0));
}
BENCHMARK(BM_merkle_root)->Arg(4096)->Arg(1 << 16)->Arg(1 << 20);

void BM_resolve_path(benchmark::State& state) {
  using namespace fuchsim::sandbox;
  std::vector<Mount> mounts;
  for (int i = 0; i < 8; i++) {
    Mount mount;
    mount.path = "/m" + std::to_string(i);
    mount.provider = fuchsim::topology::Moniker::root();
    mount.rights = fuchsim::manifest::RightsSet::all();
    mount.dir = std::make_shared<VirtualDir>();
    mounts.push_back(std::move(mount));
  }
  Namespace ns(fuchsim::topology::Moniker::root(), std::move(mounts));
  for (auto _ : state) {
    auto resolved = ns.resolve_path("/m5/deep/nested/entry.txt");
    benchmark::DoNotOptimize(resolved);
  }
}
BENCHMARK(BM_resolve_path);

}  // namespace

BENCHMARK_MAIN();
