#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fingergan::checkpoint {

struct NamedArray {
  std::string name;
  std::vector<int> shape;
  std::vector<float> values;
};

/// Versioned container: magic "FGCKPT01", uint32 version, uint64 spec hash,
/// uint64 iteration, string metadata, named float32 arrays, and a trailing
/// FNV-1a 64 checksum of every preceding byte. Integers are little-endian.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::uint64_t spec_hash = 0;
  std::uint64_t iteration = 0;
  std::map<std::string, std::string> metadata;
  std::vector<NamedArray> arrays;

  const NamedArray* find(const std::string& name) const;
  /// Throws std::runtime_error naming the missing key.
  const std::string& meta(const std::string& key) const;
};

/// Writes to a sibling temporary file and renames it over `path`.
void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Rejects bad magic, unknown versions, truncation and checksum mismatches.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace fingergan::checkpoint
