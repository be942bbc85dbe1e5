#pragma once

#include <stdexcept>
#include <string>

namespace granular {

enum class ErrorKind {
  ingestion,
  configuration,
  size,
  encoding,
  measure,
  shape,
  training,
  clustering,
  attribute,
  induction,
  io,
  usage,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace granular
