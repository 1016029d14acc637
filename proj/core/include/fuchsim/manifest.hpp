#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fuchsim/json5.hpp"
#include "fuchsim/rights.hpp"

namespace fuchsim::manifest {

using json5::SourcePos;

/// The seven capability types.
enum class CapabilityType {
  kDirectory,
  kEvent,
  kProtocol,
  kResolver,
  kRunner,
  kService,
  kStorage,
};

const std::string& capability_type_name(CapabilityType t);
std::optional<CapabilityType> capability_type_from_name(std::string_view name);

/// Where a routed capability comes from: the parent, the declaring
/// component itself, or a named child (`#name`).
struct SourceRef {
  enum class Kind { kParent, kSelf, kChild };
  Kind kind = Kind::kParent;
  std::string child_name;  // set when kind == kChild

  static SourceRef parent() { return {Kind::kParent, ""}; }
  static SourceRef self() { return {Kind::kSelf, ""}; }
  static SourceRef child(std::string name) {
    return {Kind::kChild, std::move(name)};
  }

  std::string render() const;
  friend bool operator==(const SourceRef&, const SourceRef&) = default;
};

struct CapabilityDecl {
  CapabilityType type = CapabilityType::kProtocol;
  std::string name;
  std::optional<RightsSet> rights;
  std::optional<std::string> path;
  SourcePos pos;

  friend bool operator==(const CapabilityDecl& a, const CapabilityDecl& b) {
    return a.type == b.type && a.name == b.name && a.rights == b.rights &&
           a.path == b.path;
  }
};

struct UseDecl {
  CapabilityType type = CapabilityType::kProtocol;
  std::string name;
  std::optional<RightsSet> rights;
  std::optional<std::string> path;
  SourceRef from = SourceRef::parent();  // the only supported use source
  SourcePos pos;

  friend bool operator==(const UseDecl& a, const UseDecl& b) {
    return a.type == b.type && a.name == b.name && a.rights == b.rights &&
           a.path == b.path && a.from == b.from;
  }
};

struct OfferDecl {
  CapabilityType type = CapabilityType::kProtocol;
  std::string name;
  std::optional<RightsSet> rights;
  SourceRef from;
  std::vector<std::string> to;  // target refs, each `#name`
  SourcePos pos;

  friend bool operator==(const OfferDecl& a, const OfferDecl& b) {
    return a.type == b.type && a.name == b.name && a.rights == b.rights &&
           a.from == b.from && a.to == b.to;
  }
};

struct ExposeDecl {
  CapabilityType type = CapabilityType::kProtocol;
  std::string name;
  std::optional<RightsSet> rights;
  SourceRef from;
  SourcePos pos;

  friend bool operator==(const ExposeDecl& a, const ExposeDecl& b) {
    return a.type == b.type && a.name == b.name && a.rights == b.rights &&
           a.from == b.from;
  }
};

struct ChildDecl {
  std::string name;
  std::string url;
  SourcePos pos;

  friend bool operator==(const ChildDecl& a, const ChildDecl& b) {
    return a.name == b.name && a.url == b.url;
  }
};

struct CollectionDecl {
  std::string name;
  SourcePos pos;

  friend bool operator==(const CollectionDecl& a, const CollectionDecl& b) {
    return a.name == b.name;
  }
};

struct ProgramBlock {
  std::string runner;
  std::string binary;
  std::vector<std::string> args;
  SourcePos pos;

  friend bool operator==(const ProgramBlock& a, const ProgramBlock& b) {
    return a.runner == b.runner && a.binary == b.binary && a.args == b.args;
  }
};

struct ComponentManifest {
  std::optional<ProgramBlock> program;
  std::vector<std::string> includes;
  std::vector<CapabilityDecl> capabilities;
  std::vector<UseDecl> uses;
  std::vector<OfferDecl> offers;
  std::vector<ExposeDecl> exposes;
  std::vector<ChildDecl> children;
  std::vector<CollectionDecl> collections;

  friend bool operator==(const ComponentManifest&,
                         const ComponentManifest&) = default;
};

// Parse-time errors. SyntaxError carries the source position; it also
// covers structural problems (unknown keys, bad source refs) found while
// decoding the document into declarations.
class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public ManifestError {
 public:
  SyntaxError(SourcePos pos, const std::string& what)
      : ManifestError(what), pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

class UnknownCapabilityTypeError : public ManifestError {
 public:
  using ManifestError::ManifestError;
};

class DuplicateChildNameError : public ManifestError {
 public:
  using ManifestError::ManifestError;
};

class IncludeNotFoundError : public ManifestError {
 public:
  using ManifestError::ManifestError;
};

class IncludeCycleError : public ManifestError {
 public:
  using ManifestError::ManifestError;
};

/// Machine-readable validation finding.
struct Diagnostic {
  std::string code;     // e.g. "UnresolvedTargetRef"
  std::string subject;  // offending name or ref
  SourcePos pos;
  std::string message;

  /// `CODE path line:col message`
  std::string render(std::string_view path) const;
};

/// Parses manifest text. Rights tokens are expanded; includes are left
/// for merge_includes. Deterministic; never crashes on arbitrary bytes.
ComponentManifest parse_manifest(std::string_view text);

/// Canonical text form; parse(serialize(m)) is structurally equal to m
/// and serialize is a fixed point over parse.
std::string serialize_manifest(const ComponentManifest& m);

/// Cross-declaration checks: unique child/collection/capability names,
/// resolvable `#name` refs, directory decls carrying rights and path.
/// Empty result means the manifest invariants hold.
std::vector<Diagnostic> validate_manifest(const ComponentManifest& m);

using IncludeLoader =
    std::function<std::optional<std::string>(const std::string& path)>;

/// Expands the include list: included sections come first, the including
/// manifest's program wins, and the result carries no includes. Shards
/// may include further shards; cycles raise IncludeCycleError.
ComponentManifest merge_includes(const ComponentManifest& m,
                                 const IncludeLoader& loader);

}  // namespace fuchsim::manifest
