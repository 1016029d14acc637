#include "fuchsim/pkg.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fuchsim::pkg {

namespace {

constexpr size_t kBlockSize = 4096;
constexpr uint8_t kLeafPrefix = 0x00;
constexpr uint8_t kNodePrefix = 0x01;

using Digest = std::array<uint8_t, 32>;

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr);
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const uint8_t* data, size_t len) {
    if (len > 0) EVP_DigestUpdate(ctx_, data, len);
  }
  Digest finish() {
    Digest out;
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, out.data(), &len);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

Digest leaf_digest(std::span<const uint8_t> block) {
  Sha256 h;
  h.update(&kLeafPrefix, 1);
  h.update(block.data(), block.size());
  return h.finish();
}

Digest node_digest(const Digest& left, const Digest& right) {
  Sha256 h;
  h.update(&kNodePrefix, 1);
  h.update(left.data(), left.size());
  h.update(right.data(), right.size());
  return h.finish();
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string MerkleRoot::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

MerkleRoot MerkleRoot::from_hex(std::string_view hex) {
  if (hex.size() != 64)
    throw MetaCorruptError("merkle root must be 64 hex chars");
  MerkleRoot root;
  for (size_t i = 0; i < 32; i++) {
    int hi = hex_digit(hex[2 * i]);
    int lo = hex_digit(hex[2 * i + 1]);
    if (hi < 0 || lo < 0)
      throw MetaCorruptError("merkle root contains non-hex characters");
    root.bytes[i] = static_cast<uint8_t>((hi << 4) | lo);
  }
  return root;
}

MerkleRoot merkle_root(std::span<const uint8_t> content) {
  std::vector<Digest> level;
  if (content.empty()) {
    level.push_back(leaf_digest({}));
  } else {
    for (size_t off = 0; off < content.size(); off += kBlockSize) {
      size_t len = std::min(kBlockSize, content.size() - off);
      level.push_back(leaf_digest(content.subspan(off, len)));
    }
  }
  while (level.size() > 1) {
    std::vector<Digest> next;
    size_t i = 0;
    for (; i + 1 < level.size(); i += 2)
      next.push_back(node_digest(level[i], level[i + 1]));
    if (i < level.size()) next.push_back(level[i]);  // odd node promotes
    level = std::move(next);
  }
  MerkleRoot root;
  root.bytes = level.front();
  return root;
}

MerkleRoot merkle_root(std::string_view content) {
  return merkle_root(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(content.data()), content.size()));
}

namespace {

void check_path(const std::string& path) {
  if (path.empty() || path.front() == '/')
    throw InvalidPathError("package path '" + path + "' must be relative");
  size_t start = 0;
  while (start <= path.size()) {
    size_t end = path.find('/', start);
    std::string_view seg = end == std::string::npos
                               ? std::string_view(path).substr(start)
                               : std::string_view(path).substr(start, end - start);
    if (seg.empty() || seg == "." || seg == "..")
      throw InvalidPathError("package path '" + path +
                             "' contains an invalid segment");
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (path == "meta" || path.rfind("meta/", 0) == 0)
    throw InvalidPathError("package path '" + path +
                           "' collides with the meta directory");
}

}  // namespace

std::pair<Package, MetaArchive> build_package(
    const std::string& name, const std::string& version,
    const std::vector<std::pair<std::string, std::vector<uint8_t>>>& files) {
  Package pkg;
  pkg.name = name;
  pkg.version = version;
  for (const auto& [path, bytes] : files) {
    check_path(path);
    if (pkg.files.count(path))
      throw DuplicatePathError("package path '" + path + "' listed twice");
    pkg.files[path] = bytes;
    pkg.contents[path] = merkle_root(std::span<const uint8_t>(bytes));
  }

  MetaArchive meta;
  nlohmann::json doc;
  doc["name"] = name;
  doc["version"] = version;
  meta.package_doc = doc.dump();

  std::ostringstream contents;
  for (const auto& [path, root] : pkg.contents)
    contents << path << "=" << root.hex() << "\n";
  meta.contents_doc = contents.str();
  return {std::move(pkg), std::move(meta)};
}

namespace {

std::map<std::string, MerkleRoot> parse_contents(const std::string& doc) {
  std::map<std::string, MerkleRoot> out;
  size_t start = 0;
  while (start < doc.size()) {
    size_t end = doc.find('\n', start);
    if (end == std::string::npos)
      throw MetaCorruptError("meta/contents missing trailing newline");
    std::string line = doc.substr(start, end - start);
    size_t eq = line.rfind('=');
    if (eq == std::string::npos || eq == 0)
      throw MetaCorruptError("meta/contents line lacks 'path=root'");
    std::string path = line.substr(0, eq);
    out[path] = MerkleRoot::from_hex(line.substr(eq + 1));
    start = end + 1;
  }
  return out;
}

void parse_package_doc(const std::string& doc) {
  nlohmann::json parsed = nlohmann::json::parse(doc, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object() ||
      !parsed.contains("name") || !parsed["name"].is_string() ||
      !parsed.contains("version") || !parsed["version"].is_string()) {
    throw MetaCorruptError("meta/package is not a name/version document");
  }
}

}  // namespace

VerifyReport verify_package(const FileMap& files, const MetaArchive& meta) {
  parse_package_doc(meta.package_doc);
  std::map<std::string, MerkleRoot> expected = parse_contents(meta.contents_doc);

  VerifyReport report;
  for (const auto& [path, root] : expected) {
    auto it = files.find(path);
    if (it == files.end()) {
      report.issues.push_back({VerifyIssue::Kind::kMissingFile, path});
      continue;
    }
    if (merkle_root(std::span<const uint8_t>(it->second)) != root)
      report.issues.push_back({VerifyIssue::Kind::kMismatch, path});
  }
  for (const auto& [path, bytes] : files) {
    if (!expected.count(path))
      report.issues.push_back({VerifyIssue::Kind::kUnlistedFile, path});
  }
  report.ok = report.issues.empty();
  return report;
}

namespace {

namespace fs = std::filesystem;

std::vector<uint8_t> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw PkgError("cannot read '" + p.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, std::span<const uint8_t> bytes) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw PkgError("cannot write '" + p.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_text(const fs::path& p, const std::string& text) {
  write_file(p, std::span<const uint8_t>(
                    reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

FileMap read_content_files(const fs::path& dir) {
  FileMap files;
  if (!fs::exists(dir)) throw PkgError("no such directory '" + dir.string() + "'");
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    fs::path rel = fs::relative(entry.path(), dir);
    std::string rel_str = rel.generic_string();
    if (rel_str == "meta" || rel_str.rfind("meta/", 0) == 0) continue;
    files[rel_str] = read_file(entry.path());
  }
  return files;
}

}  // namespace

void write_package_dir(const std::filesystem::path& dir, const Package& pkg,
                       const MetaArchive& meta) {
  for (const auto& [path, bytes] : pkg.files)
    write_file(dir / path, std::span<const uint8_t>(bytes));
  write_text(dir / "meta" / "package", meta.package_doc);
  write_text(dir / "meta" / "contents", meta.contents_doc);
}

MetaArchive build_package_dir(const std::filesystem::path& dir,
                              const std::string& name,
                              const std::string& version) {
  FileMap files = read_content_files(dir);
  std::vector<std::pair<std::string, std::vector<uint8_t>>> listed(
      files.begin(), files.end());
  auto [pkg, meta] = build_package(name, version, listed);
  write_text(dir / "meta" / "package", meta.package_doc);
  write_text(dir / "meta" / "contents", meta.contents_doc);
  return meta;
}

VerifyReport verify_package_dir(const std::filesystem::path& dir) {
  fs::path package_path = dir / "meta" / "package";
  fs::path contents_path = dir / "meta" / "contents";
  if (!fs::exists(package_path) || !fs::exists(contents_path))
    throw MetaCorruptError("package meta directory is incomplete");
  MetaArchive meta;
  std::vector<uint8_t> pkg_doc = read_file(package_path);
  std::vector<uint8_t> contents_doc = read_file(contents_path);
  meta.package_doc.assign(pkg_doc.begin(), pkg_doc.end());
  meta.contents_doc.assign(contents_doc.begin(), contents_doc.end());
  return verify_package(read_content_files(dir), meta);
}

}  // namespace fuchsim::pkg
