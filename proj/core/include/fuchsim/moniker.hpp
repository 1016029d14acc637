#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fuchsim::topology {

class MalformedMonikerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Path-like instance identifier. Root renders as `/`, descendants as
/// `/a/b`; children created in a collection carry a `coll:name` segment.
class Moniker {
 public:
  Moniker() = default;

  static Moniker root() { return Moniker(); }
  static Moniker parse(std::string_view text);

  bool is_root() const { return segments_.empty(); }
  size_t depth() const { return segments_.size(); }
  const std::vector<std::string>& segments() const { return segments_; }
  const std::string& leaf_name() const { return segments_.back(); }

  Moniker child(std::string_view name) const;
  Moniker parent() const;

  /// True when this moniker is `other` or an ancestor of it.
  bool is_prefix_of(const Moniker& other) const;

  std::string render() const;

  friend bool operator==(const Moniker&, const Moniker&) = default;
  friend bool operator<(const Moniker& a, const Moniker& b) {
    return a.segments_ < b.segments_;
  }

 private:
  std::vector<std::string> segments_;
};

}  // namespace fuchsim::topology
