#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fuchsim::manifest {

/// Base directory rights.
enum class Right : uint16_t {
  kConnect = 1u << 0,
  kEnumerate = 1u << 1,
  kTraverse = 1u << 2,
  kReadBytes = 1u << 3,
  kWriteBytes = 1u << 4,
  kExecuteBytes = 1u << 5,
  kGetAttributes = 1u << 6,
  kUpdateAttributes = 1u << 7,
  kModifyDirectory = 1u << 8,
};

inline constexpr int kRightCount = 9;

class UnknownRightsTokenError : public std::runtime_error {
 public:
  explicit UnknownRightsTokenError(const std::string& token)
      : std::runtime_error("unknown rights token '" + token + "'"),
        token_(token) {}
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

/// Small set over the nine base rights.
class RightsSet {
 public:
  RightsSet() = default;
  RightsSet(std::initializer_list<Right> rights) {
    for (Right r : rights) bits_ |= static_cast<uint16_t>(r);
  }

  static RightsSet all();
  static RightsSet none() { return RightsSet(); }

  bool contains(Right r) const {
    return (bits_ & static_cast<uint16_t>(r)) != 0;
  }
  bool empty() const { return bits_ == 0; }
  bool subset_of(RightsSet other) const {
    return (bits_ & ~other.bits_) == 0;
  }

  RightsSet union_with(RightsSet other) const {
    RightsSet s;
    s.bits_ = bits_ | other.bits_;
    return s;
  }
  RightsSet intersect(RightsSet other) const {
    RightsSet s;
    s.bits_ = bits_ & other.bits_;
    return s;
  }

  uint16_t bits() const { return bits_; }

  friend bool operator==(RightsSet a, RightsSet b) { return a.bits_ == b.bits_; }
  friend bool operator!=(RightsSet a, RightsSet b) { return a.bits_ != b.bits_; }

 private:
  uint16_t bits_ = 0;
};

/// Expands rights tokens (`r*`, `w*`, `x*`, `rw*`, `rx*`, or base right
/// names) into a RightsSet. Throws UnknownRightsTokenError. Idempotent:
/// re-expanding rendered tokens yields the same set.
RightsSet expand_rights(std::span<const std::string> tokens);
RightsSet expand_rights(std::initializer_list<std::string> tokens);

/// Renders a set back to tokens; uses a group token when the set equals
/// one of the group expansions exactly, base right names otherwise.
std::vector<std::string> rights_tokens(RightsSet set);

const std::string& right_name(Right r);

}  // namespace fuchsim::manifest
