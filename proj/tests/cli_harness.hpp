#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace harness {

namespace fs = std::filesystem;

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Outcome {
  int status = -1;
  std::string err;
};

class CliSandbox {
 public:
  CliSandbox(std::string binary, const std::string& tag) : binary_(std::move(binary)) {
    root_ = fs::temp_directory_path() / ("granular_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  ~CliSandbox() { fs::remove_all(root_); }

  fs::path path(const std::string& rel) const { return root_ / rel; }

  Outcome run(const std::string& args) const {
    const auto err = root_ / "stderr.txt";
    const std::string cmd = "cd '" + root_.string() + "' && '" + binary_ + "' " + args + " 2> '" + err.string() + "'";
    const int raw = std::system(cmd.c_str());
    Outcome o;
    o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    o.err = slurp(err);
    return o;
  }

  /// Runs `args` with --out a and --out b; true when both succeed and every
  /// file matches byte for byte. Leaves a in place for later steps.
  bool rerun_identical(const std::string& name, const std::string& args, std::string* why = nullptr) const {
    for (const char* suffix : {"", "_again"}) {
      const auto o = run("--out " + name + suffix + " " + args);
      if (o.status != 0) {
        if (why) *why = name + ": exit " + std::to_string(o.status) + " " + o.err;
        return false;
      }
    }
    auto listing = [&](const fs::path& dir) {
      std::map<std::string, std::string> files;
      for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
      return files;
    };
    const auto a = listing(path(name)), b = listing(path(name + "_again"));
    if (a != b || a.empty()) {
      if (why) *why = name + ": outputs differ between reruns";
      return false;
    }
    if (!a.count("manifest.txt")) {
      if (why) *why = name + ": no manifest";
      return false;
    }
    return true;
  }

 private:
  std::string binary_;
  fs::path root_;
};

}  // namespace harness
