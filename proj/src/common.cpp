#include <algorithm>
#include <iostream>

#include "granular/error.hpp"
#include "granular/log.hpp"
#include "granular/matrix.hpp"

namespace granular {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ingestion: return "ingestion error";
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::size: return "size error";
    case ErrorKind::encoding: return "encoding error";
    case ErrorKind::measure: return "measure error";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::training: return "training error";
    case ErrorKind::clustering: return "clustering error";
    case ErrorKind::attribute: return "attribute error";
    case ErrorKind::induction: return "induction error";
    case ErrorKind::io: return "io error";
    case ErrorKind::usage: return "usage error";
  }
  return "error";
}

namespace {
LogLevel g_level = LogLevel::warning;
}

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log(LogLevel level, std::string_view message) {
  if (level < g_level) return;
  static const char* names[] = {"debug", "info", "warning", ""};
  std::clog << "[granular " << names[static_cast<int>(level)] << "] " << message << '\n';
}

FeatureScale FeatureScale::fit(const Matrix& data) {
  FeatureScale scale;
  scale.min.assign(data.cols(), 0.0);
  scale.range.assign(data.cols(), 1.0);
  for (std::size_t j = 0; j < data.cols(); ++j) {
    double lo = data(0, j), hi = data(0, j);
    for (std::size_t i = 1; i < data.rows(); ++i) {
      lo = std::min(lo, data(i, j));
      hi = std::max(hi, data(i, j));
    }
    scale.min[j] = lo;
    scale.range[j] = hi > lo ? hi - lo : 1.0;
  }
  return scale;
}

Matrix FeatureScale::to_unit(const Matrix& data) const {
  Matrix out(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t j = 0; j < data.cols(); ++j) out(i, j) = to_unit(j, data(i, j));
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return sum;
}

}  // namespace granular
