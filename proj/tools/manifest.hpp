#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace granular::cli {

std::string sha256_hex(std::string_view data);
std::string read_file(const std::string& path);

/// Reproduction record written next to every command's outputs.
class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed) : command_(std::move(command)), seed_(seed) {}

  /// Reads the file, records its digest and returns its contents.
  std::string add_input(const std::string& role, const std::string& path);
  /// Writes `content` to dir/name and records its digest.
  void write_output(const std::string& dir, const std::string& name, const std::string& content);

  std::string render(const std::string& canonical_config) const;
  void write(const std::string& dir, const std::string& canonical_config) const;

 private:
  std::string command_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

}  // namespace granular::cli
