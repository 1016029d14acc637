#include "fuchsim/sandbox.hpp"

#include <algorithm>
#include <sstream>

namespace fuchsim::sandbox {

using manifest::CapabilityType;
using manifest::Right;

void VirtualDir::check_name(const std::string& name) {
  if (name.empty() || name == "." || name == ".." ||
      name.find('/') != std::string::npos) {
    throw std::invalid_argument("invalid entry name '" + name + "'");
  }
}

std::shared_ptr<VirtualDir> VirtualDir::ensure_dir(const std::string& name) {
  check_name(name);
  auto it = entries_.find(name);
  if (it != entries_.end()) {
    if (auto* dir = std::get_if<std::shared_ptr<VirtualDir>>(&it->second))
      return *dir;
    throw std::invalid_argument("entry '" + name + "' is a file");
  }
  auto dir = std::make_shared<VirtualDir>();
  entries_[name] = dir;
  return dir;
}

std::shared_ptr<VirtualFile> VirtualDir::put_file(const std::string& name,
                                                  std::vector<uint8_t> bytes) {
  check_name(name);
  auto file = std::make_shared<VirtualFile>(VirtualFile{std::move(bytes)});
  entries_[name] = file;
  return file;
}

const VirtualDir::Entry* VirtualDir::lookup(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> VirtualDir::names() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : entries_) out.push_back(name);
  return out;
}

namespace {

std::string registry_key(const Moniker& provider, const std::string& cap) {
  return provider.render() + "\x1f" + cap;
}

// Requester monikers become single directory names; segments are joined
// with ',' since '/' cannot appear in an entry name.
std::string requester_key(const Moniker& requester) {
  if (requester.is_root()) return "root";
  std::string out;
  for (const std::string& seg : requester.segments()) {
    if (!out.empty()) out.push_back(',');
    out += seg;
  }
  return out;
}

}  // namespace

std::shared_ptr<VirtualDir> ProviderRegistry::directory_for(
    const Moniker& provider, const std::string& cap_name) {
  auto& slot = dirs_[registry_key(provider, cap_name)];
  if (!slot) slot = std::make_shared<VirtualDir>();
  return slot;
}

std::shared_ptr<VirtualDir> ProviderRegistry::storage_for(
    const Moniker& provider, const std::string& cap_name,
    const Moniker& requester) {
  return directory_for(provider, cap_name)->ensure_dir(requester_key(requester));
}

bool FileRef::is_dir() const {
  return std::holds_alternative<std::shared_ptr<VirtualDir>>(entry_);
}

std::vector<uint8_t> FileRef::read() const {
  if (!granted_.contains(Right::kReadBytes))
    throw AccessDeniedError("read_bytes not granted");
  auto* file = std::get_if<std::shared_ptr<VirtualFile>>(&entry_);
  if (!file) throw NotFoundError("entry is a directory");
  return (*file)->bytes;
}

void FileRef::write(std::vector<uint8_t> bytes) {
  if (!granted_.contains(Right::kWriteBytes))
    throw AccessDeniedError("write_bytes not granted");
  auto* file = std::get_if<std::shared_ptr<VirtualFile>>(&entry_);
  if (!file) throw NotFoundError("entry is a directory");
  (*file)->bytes = std::move(bytes);
}

std::vector<std::string> FileRef::list() const {
  if (!granted_.contains(Right::kEnumerate))
    throw AccessDeniedError("enumerate not granted");
  auto* dir = std::get_if<std::shared_ptr<VirtualDir>>(&entry_);
  if (!dir) throw NotFoundError("entry is a file");
  return (*dir)->names();
}

std::vector<std::string> screen_path(const std::string& path) {
  // Raw segments are screened before any normalization so `a/../b` is
  // rejected rather than collapsed away.
  std::vector<std::string> raw;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      raw.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  raw.push_back(cur);
  for (const std::string& seg : raw) {
    if (seg == "..") throw DotDotRejectedError(path);
  }
  std::vector<std::string> out;
  for (std::string& seg : raw) {
    if (seg.empty() || seg == ".") continue;
    out.push_back(std::move(seg));
  }
  return out;
}

Namespace::Namespace(Moniker owner, std::vector<Mount> mounts)
    : owner_(std::move(owner)), mounts_(std::move(mounts)) {
  std::sort(mounts_.begin(), mounts_.end(),
            [](const Mount& a, const Mount& b) { return a.path < b.path; });
}

std::pair<const Mount*, std::string> Namespace::resolve_path(
    const std::string& path) const {
  std::vector<std::string> segments = screen_path(path);
  if (path.empty() || path[0] != '/')
    throw NotFoundError("path '" + path + "' is not absolute");

  const Mount* best = nullptr;
  size_t best_len = 0;
  for (const Mount& mount : mounts_) {
    std::vector<std::string> mseg = screen_path(mount.path);
    if (mseg.size() > segments.size()) continue;
    if (!std::equal(mseg.begin(), mseg.end(), segments.begin())) continue;
    if (!best || mseg.size() > best_len) {
      best = &mount;
      best_len = mseg.size();
    }
  }
  if (!best) throw NotFoundError("no mount covers '" + path + "'");

  std::string remainder;
  for (size_t i = best_len; i < segments.size(); i++) {
    if (!remainder.empty()) remainder.push_back('/');
    remainder += segments[i];
  }
  return {best, remainder};
}

FileRef Namespace::open(const std::string& path, RightsSet requested) const {
  auto [mount, remainder] = resolve_path(path);
  if (!requested.subset_of(mount->rights))
    throw AccessDeniedError("requested rights exceed mount rights at '" +
                            mount->path + "'");
  VirtualDir::Entry entry = mount->dir;
  if (!remainder.empty()) {
    std::shared_ptr<VirtualDir> dir = mount->dir;
    std::vector<std::string> segments = screen_path("/" + remainder);
    for (size_t i = 0; i < segments.size(); i++) {
      const VirtualDir::Entry* found = dir->lookup(segments[i]);
      if (!found) throw NotFoundError("no entry '" + segments[i] + "'");
      if (i + 1 == segments.size()) {
        entry = *found;
        break;
      }
      auto* sub = std::get_if<std::shared_ptr<VirtualDir>>(found);
      if (!sub) throw NotFoundError("'" + segments[i] + "' is not a directory");
      dir = *sub;
    }
  }
  return FileRef(std::move(entry), requested);
}

std::string Namespace::render() const {
  std::ostringstream os;
  for (const Mount& mount : mounts_) {
    os << mount.path << " -> " << mount.provider.render() << " [";
    bool first = true;
    for (const std::string& tok : manifest::rights_tokens(mount.rights)) {
      if (!first) os << " ";
      os << tok;
      first = false;
    }
    os << "]\n";
  }
  return os.str();
}

Namespace build_namespace(const topology::ComponentInstanceTree& tree,
                          const Moniker& m,
                          const std::vector<routing::RouteEntry>& routes,
                          ProviderRegistry& registry) {
  (void)tree;
  std::vector<Mount> mounts;
  for (const routing::RouteEntry& entry : routes) {
    if (entry.request.requester != m) continue;
    if (!entry.outcome.ok()) continue;
    if (entry.request.type != CapabilityType::kDirectory &&
        entry.request.type != CapabilityType::kStorage) {
      continue;
    }
    const routing::RouteResult& result = *entry.outcome.result;

    // The mount path comes from the use declaration, defaulting to the
    // capability name at the root.
    const topology::ComponentInstance* inst = tree.find(m);
    std::string mount_path = "/" + entry.request.name;
    if (inst) {
      for (const manifest::UseDecl& use : inst->manifest().uses) {
        if (use.type == entry.request.type && use.name == entry.request.name &&
            use.path) {
          mount_path = *use.path;
          break;
        }
      }
    }
    std::vector<std::string> normalized = screen_path(mount_path);
    std::string canon;
    for (const std::string& seg : normalized) canon += "/" + seg;
    if (canon.empty()) canon = "/";

    Mount mount;
    mount.path = canon;
    mount.provider = result.provider;
    mount.capability = entry.request.name;
    mount.type = entry.request.type;
    mount.rights = result.effective_rights.value_or(RightsSet::all());
    if (entry.request.type == CapabilityType::kStorage) {
      mount.dir = registry.storage_for(result.provider, entry.request.name, m);
    } else {
      mount.dir = registry.directory_for(result.provider, entry.request.name);
    }
    mounts.push_back(std::move(mount));
  }
  return Namespace(m, std::move(mounts));
}

}  // namespace fuchsim::sandbox
