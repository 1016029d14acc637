#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fuchsim::topology {

class MalformedUrlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Component URL of the form `scheme://repository/package#fragment`,
/// e.g. `fuchsia-pkg://fuchsia.com/stash#meta/stash_secure.cm`.
struct ComponentUrl {
  std::string scheme;
  std::string repository;
  std::string package;
  std::string fragment;

  static ComponentUrl parse(std::string_view text);
  std::string render() const;

  friend bool operator==(const ComponentUrl&, const ComponentUrl&) = default;
};

}  // namespace fuchsim::topology
