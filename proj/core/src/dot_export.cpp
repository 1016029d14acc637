#include "fuchsim/dot_export.hpp"

#include <sstream>

namespace fuchsim::routing {

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void emit_tree(const topology::ComponentInstance& inst, std::ostringstream& os) {
  std::string name = inst.moniker().render();
  os << "  " << quoted(name) << " [label=" << quoted(name) << "];\n";
  for (const auto& child : inst.children()) {
    os << "  " << quoted(name) << " -> "
       << quoted(child->moniker().render()) << ";\n";
    emit_tree(*child, os);
  }
}

}  // namespace

std::string export_dot(const ComponentInstanceTree& tree,
                       const std::vector<RouteEntry>& results) {
  std::ostringstream os;
  os << "digraph capability_routes {\n";
  os << "  rankdir=TB;\n";
  os << "  node [shape=box];\n";
  if (tree.root()) emit_tree(*tree.root(), os);

  for (const RouteEntry& entry : results) {
    std::string cap = manifest::capability_type_name(entry.request.type) + "/" +
                      entry.request.name;
    if (entry.outcome.ok()) {
      const RouteResult& r = *entry.outcome.result;
      for (size_t i = 0; i + 1 < r.hops.size(); i++) {
        os << "  " << quoted(r.hops[i].at.render()) << " -> "
           << quoted(r.hops[i + 1].at.render()) << " [style=dashed, label="
           << quoted(std::to_string(i + 1)) << "];\n";
      }
    } else {
      const RouteError& e = *entry.outcome.error;
      os << "  " << quoted(entry.request.requester.render()) << " -> "
         << quoted(e.at.render()) << " [style=dashed, color=red, label="
         << quoted(route_error_kind_name(e.kind) + " " + cap) << "];\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace fuchsim::routing
