#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fuchsim/routing.hpp"

namespace fuchsim::sandbox {

using manifest::RightsSet;
using topology::Moniker;

class DotDotRejectedError : public std::runtime_error {
 public:
  explicit DotDotRejectedError(const std::string& path)
      : std::runtime_error("path '" + path + "' contains a '..' segment") {}
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AccessDeniedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VirtualDir;

struct VirtualFile {
  std::vector<uint8_t> bytes;
};

/// In-memory tree of named entries. Entry names carry no `/` and are
/// never `.` or `..`.
class VirtualDir {
 public:
  using Entry =
      std::variant<std::shared_ptr<VirtualDir>, std::shared_ptr<VirtualFile>>;

  std::shared_ptr<VirtualDir> ensure_dir(const std::string& name);
  std::shared_ptr<VirtualFile> put_file(const std::string& name,
                                        std::vector<uint8_t> bytes);
  const Entry* lookup(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  static void check_name(const std::string& name);
  std::map<std::string, Entry> entries_;
};

/// Hands out the backing directory for each provider-side capability.
/// Two namespaces share mutable state only when their routes terminate
/// at the same provider declaration. Storage capabilities materialize as
/// an isolated per-requester subdirectory keyed by the requester moniker.
class ProviderRegistry {
 public:
  std::shared_ptr<VirtualDir> directory_for(const Moniker& provider,
                                            const std::string& cap_name);
  std::shared_ptr<VirtualDir> storage_for(const Moniker& provider,
                                          const std::string& cap_name,
                                          const Moniker& requester);

 private:
  std::map<std::string, std::shared_ptr<VirtualDir>> dirs_;
};

struct Mount {
  std::string path;  // absolute, normalized
  Moniker provider;
  std::string capability;
  manifest::CapabilityType type = manifest::CapabilityType::kDirectory;
  RightsSet rights;
  std::shared_ptr<VirtualDir> dir;
};

/// Handle into a mount with the rights granted at open time; every read
/// and write re-checks the granted subset.
class FileRef {
 public:
  FileRef(VirtualDir::Entry entry, RightsSet granted)
      : entry_(std::move(entry)), granted_(granted) {}

  RightsSet granted() const { return granted_; }
  bool is_dir() const;

  std::vector<uint8_t> read() const;          // needs read_bytes
  void write(std::vector<uint8_t> bytes);     // needs write_bytes
  std::vector<std::string> list() const;      // needs enumerate

 private:
  VirtualDir::Entry entry_;
  RightsSet granted_;
};

/// Per-component mount table. There is no shared root: only the mounted
/// subtrees are reachable, and any path containing a `..` segment is
/// rejected before matching.
class Namespace {
 public:
  Namespace(Moniker owner, std::vector<Mount> mounts);

  const Moniker& owner() const { return owner_; }
  const std::vector<Mount>& mounts() const { return mounts_; }

  /// Longest-prefix mount match; returns the mount and the normalized
  /// in-mount remainder.
  std::pair<const Mount*, std::string> resolve_path(
      const std::string& path) const;

  FileRef open(const std::string& path, RightsSet requested) const;

  /// `<path> -> <provider-moniker> [<rights tokens>]`, sorted by path.
  std::string render() const;

 private:
  Moniker owner_;
  std::vector<Mount> mounts_;  // sorted by path
};

/// Splits an absolute path into segments, raising DotDotRejectedError on
/// any raw `..` segment and collapsing `//` and `.` afterwards.
std::vector<std::string> screen_path(const std::string& path);

/// One mount per resolved directory/storage use declaration of m, at the
/// use declaration's path (default `/<name>`), carrying the route's
/// effective rights. Broken routes contribute nothing.
Namespace build_namespace(const topology::ComponentInstanceTree& tree,
                          const Moniker& m,
                          const std::vector<routing::RouteEntry>& routes,
                          ProviderRegistry& registry);

}  // namespace fuchsim::sandbox
