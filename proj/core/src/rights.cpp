#include "fuchsim/rights.hpp"

#include <array>
#include <utility>

namespace fuchsim::manifest {

namespace {

const std::array<std::pair<std::string, Right>, kRightCount> kBaseRights = {{
    {"connect", Right::kConnect},
    {"enumerate", Right::kEnumerate},
    {"traverse", Right::kTraverse},
    {"read_bytes", Right::kReadBytes},
    {"write_bytes", Right::kWriteBytes},
    {"execute_bytes", Right::kExecuteBytes},
    {"get_attributes", Right::kGetAttributes},
    {"update_attributes", Right::kUpdateAttributes},
    {"modify_directory", Right::kModifyDirectory},
}};

RightsSet r_star() {
  return {Right::kConnect, Right::kEnumerate, Right::kTraverse,
          Right::kReadBytes, Right::kGetAttributes};
}

RightsSet w_star() {
  return {Right::kConnect, Right::kEnumerate, Right::kTraverse,
          Right::kWriteBytes, Right::kUpdateAttributes,
          Right::kModifyDirectory};
}

RightsSet x_star() {
  return {Right::kConnect, Right::kEnumerate, Right::kTraverse,
          Right::kExecuteBytes};
}

}  // namespace

RightsSet RightsSet::all() {
  RightsSet s;
  for (const auto& [name, r] : kBaseRights) s = s.union_with(RightsSet{r});
  return s;
}

RightsSet expand_rights(std::span<const std::string> tokens) {
  RightsSet out;
  for (const std::string& tok : tokens) {
    if (tok == "r*") {
      out = out.union_with(r_star());
    } else if (tok == "w*") {
      out = out.union_with(w_star());
    } else if (tok == "x*") {
      out = out.union_with(x_star());
    } else if (tok == "rw*") {
      out = out.union_with(r_star()).union_with(w_star());
    } else if (tok == "rx*") {
      out = out.union_with(r_star()).union_with(x_star());
    } else {
      bool found = false;
      for (const auto& [name, r] : kBaseRights) {
        if (tok == name) {
          out = out.union_with(RightsSet{r});
          found = true;
          break;
        }
      }
      if (!found) throw UnknownRightsTokenError(tok);
    }
  }
  return out;
}

RightsSet expand_rights(std::initializer_list<std::string> tokens) {
  std::vector<std::string> v(tokens);
  return expand_rights(std::span<const std::string>(v));
}

std::vector<std::string> rights_tokens(RightsSet set) {
  if (set == r_star().union_with(w_star())) return {"rw*"};
  if (set == r_star().union_with(x_star())) return {"rx*"};
  if (set == r_star()) return {"r*"};
  if (set == w_star()) return {"w*"};
  if (set == x_star()) return {"x*"};
  std::vector<std::string> out;
  for (const auto& [name, r] : kBaseRights) {
    if (set.contains(r)) out.push_back(name);
  }
  return out;
}

const std::string& right_name(Right r) {
  for (const auto& [name, right] : kBaseRights) {
    if (right == r) return name;
  }
  static const std::string unknown = "?";
  return unknown;
}

}  // namespace fuchsim::manifest
