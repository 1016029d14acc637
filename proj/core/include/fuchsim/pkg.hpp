#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fuchsim::pkg {

/// 32-byte digest of the block-level hash tree over a file's contents.
struct MerkleRoot {
  std::array<uint8_t, 32> bytes{};

  std::string hex() const;
  static MerkleRoot from_hex(std::string_view hex);

  friend bool operator==(const MerkleRoot&, const MerkleRoot&) = default;
};

/// Tree parameters are frozen: 4096-byte blocks, SHA-256, leaf digests
/// prefixed 0x00, interior digests 0x01 over the two child digests, an
/// odd node at any level promotes unchanged, and empty content hashes as
/// an empty leaf.
MerkleRoot merkle_root(std::span<const uint8_t> content);
MerkleRoot merkle_root(std::string_view content);

using FileMap = std::map<std::string, std::vector<uint8_t>>;

struct Package {
  std::string name;
  std::string version;
  std::map<std::string, MerkleRoot> contents;
  FileMap files;
};

/// Byte-deterministic serialized meta directory.
struct MetaArchive {
  std::string package_doc;   // meta/package
  std::string contents_doc;  // meta/contents
};

class PkgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPathError : public PkgError {
 public:
  using PkgError::PkgError;
};

class DuplicatePathError : public PkgError {
 public:
  using PkgError::PkgError;
};

class MetaCorruptError : public PkgError {
 public:
  using PkgError::PkgError;
};

/// Computes each file's root and the meta documents. Paths must be
/// relative, `/`-separated, free of `.`/`..` segments, and outside
/// `meta/`.
std::pair<Package, MetaArchive> build_package(
    const std::string& name, const std::string& version,
    const std::vector<std::pair<std::string, std::vector<uint8_t>>>& files);

struct VerifyIssue {
  enum class Kind { kMismatch, kMissingFile, kUnlistedFile };
  Kind kind;
  std::string path;

  friend bool operator==(const VerifyIssue&, const VerifyIssue&) = default;
};

struct VerifyReport {
  bool ok = false;
  std::vector<VerifyIssue> issues;
};

/// Recomputes every root and compares against the contents document.
/// Tampering is reported, not thrown; only an unparseable meta raises
/// MetaCorruptError.
VerifyReport verify_package(const FileMap& files, const MetaArchive& meta);

/// Writes content files plus meta/package and meta/contents.
void write_package_dir(const std::filesystem::path& dir, const Package& pkg,
                       const MetaArchive& meta);

/// Builds the meta directory in place from the files already under dir.
MetaArchive build_package_dir(const std::filesystem::path& dir,
                              const std::string& name,
                              const std::string& version);

/// Loads and verifies a package directory.
VerifyReport verify_package_dir(const std::filesystem::path& dir);

}  // namespace fuchsim::pkg
