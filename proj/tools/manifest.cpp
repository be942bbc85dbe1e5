#include "manifest.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "granular/error.hpp"

namespace granular::cli {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr))
    throw Error(ErrorKind::io, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string Manifest::add_input(const std::string& role, const std::string& path) {
  auto content = read_file(path);
  inputs_.emplace_back(role + " " + path, sha256_hex(content));
  return content;
}

void Manifest::write_output(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
  outputs_.emplace_back(name, sha256_hex(content));
}

std::string Manifest::render(const std::string& canonical_config) const {
  std::string out = "granular-manifest 1\n";
  out += "command " + command_ + "\n";
  out += "seed " + std::to_string(seed_) + "\n";
  out += "config_sha256 " + sha256_hex(canonical_config) + "\n";
  std::istringstream params(canonical_config);
  for (std::string line; std::getline(params, line);) out += "param " + line + "\n";
  for (const auto& [what, digest] : inputs_) out += "input " + what + " sha256 " + digest + "\n";
  for (const auto& [name, digest] : outputs_) out += "output " + name + " sha256 " + digest + "\n";
  return out;
}

void Manifest::write(const std::string& dir, const std::string& canonical_config) const {
  std::filesystem::create_directories(dir);
  const auto path = (std::filesystem::path(dir) / "manifest.txt").string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << render(canonical_config);
}

}  // namespace granular::cli
