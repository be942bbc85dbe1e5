#include "granular/lattice.hpp"

#include <cmath>
#include <sstream>

#include "granular/error.hpp"
#include "granular/format.hpp"

namespace granular::lattice {

std::size_t AxisSpec::count() const {
  validate();
  return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

void AxisSpec::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(ErrorKind::configuration, "axis '" + name + "': step must be > 0");
  if (!(max >= min)) throw Error(ErrorKind::configuration, "axis '" + name + "': max must be >= min");
}

AxisSpec parse_axis(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 4) throw Error(ErrorKind::usage, "axis spec must be name:min:max:step, got '" + std::string(text) + "'");
  AxisSpec a;
  a.name = parts[0];
  const auto lo = parse_double(parts[1]), hi = parse_double(parts[2]), st = parse_double(parts[3]);
  if (!lo || !hi || !st) throw Error(ErrorKind::usage, "axis spec has a non-numeric field: '" + std::string(text) + "'");
  a.min = *lo;
  a.max = *hi;
  a.step = *st;
  a.validate();
  return a;
}

std::size_t PredictionLattice::node_count() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.count();
  return n;
}

std::vector<double> PredictionLattice::node(std::size_t flat) const {
  std::vector<double> out(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    const auto c = axes[k].count();
    out[k] = axes[k].coordinate(flat % c);
    flat /= c;
  }
  return out;
}

void PredictionLattice::validate() const {
  if (axes.empty() || axes.size() > 3) throw Error(ErrorKind::shape, "lattice needs one to three axes");
  if (values.size() != node_count()) throw Error(ErrorKind::shape, "lattice value count does not match node count");
}

PredictionLattice evaluate(std::vector<AxisSpec> axes, const Field& field) {
  PredictionLattice out{std::move(axes), {}};
  out.values.assign(out.node_count(), 0.0);
  out.validate();
  const auto n = static_cast<std::ptrdiff_t>(out.values.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out.values[i] = field(out.node(static_cast<std::size_t>(i)));
  return out;
}

PredictionLattice evaluate_serial(std::vector<AxisSpec> axes, const Field& field) {
  PredictionLattice out{std::move(axes), {}};
  out.values.assign(out.node_count(), 0.0);
  out.validate();
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = field(out.node(i));
  return out;
}

namespace {

// d/da along one axis; `stride` is the flat distance between neighbours.
std::vector<double> derivative(const std::vector<double>& f, const std::vector<std::size_t>& counts, std::size_t axis,
                               double h) {
  std::size_t stride = 1;
  for (std::size_t k = axis + 1; k < counts.size(); ++k) stride *= counts[k];
  const std::size_t n = counts[axis];
  std::vector<double> out(f.size());
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    const std::size_t i = flat / stride % n;
    const auto at = [&](std::ptrdiff_t offset) {
      return f[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(flat) + offset * static_cast<std::ptrdiff_t>(stride))];
    };
    if (i == 0)
      out[flat] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    else if (i == n - 1)
      out[flat] = (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
    else
      out[flat] = (at(1) - at(-1)) / (2.0 * h);
  }
  return out;
}

}  // namespace

PredictionLattice divergence(const PredictionLattice& lattice) {
  lattice.validate();
  std::vector<std::size_t> counts;
  for (const auto& a : lattice.axes) counts.push_back(a.count());
  PredictionLattice out{lattice.axes, std::vector<double>(lattice.values.size(), 0.0)};
  bool active = false;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 1) continue;
    if (counts[k] < 3)
      throw Error(ErrorKind::shape, "divergence: axis '" + lattice.axes[k].name + "' needs at least 3 nodes");
    active = true;
    const auto grad = derivative(lattice.values, counts, k, lattice.axes[k].step);
    const auto second = derivative(grad, counts, k, lattice.axes[k].step);
    for (std::size_t i = 0; i < second.size(); ++i) out.values[i] += second[i];
  }
  if (!active) throw Error(ErrorKind::shape, "divergence: lattice has no axis with 3 or more nodes");
  return out;
}

std::string to_csv(const PredictionLattice& lattice, std::string_view value_name) {
  lattice.validate();
  std::string out;
  for (const auto& a : lattice.axes)
    out += "# axis " + a.name + " " + format_double(a.min) + " " + format_double(a.max) + " " + format_double(a.step) + "\n";
  for (const auto& a : lattice.axes) out += a.name + ",";
  out += std::string(value_name) + "\n";
  for (std::size_t i = 0; i < lattice.values.size(); ++i) {
    for (double c : lattice.node(i)) out += format_double(c) + ",";
    out += format_double(lattice.values[i]) + "\n";
  }
  return out;
}

PredictionLattice from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  PredictionLattice out;
  bool header_seen = false;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.starts_with("# axis ")) {
      std::istringstream w{std::string(t.substr(7))};
      AxisSpec a;
      std::string lo, hi, st;
      w >> a.name >> lo >> hi >> st;
      auto vlo = parse_double(lo), vhi = parse_double(hi), vst = parse_double(st);
      if (!vlo || !vhi || !vst) throw Error(ErrorKind::io, "lattice: bad axis line '" + line + "'");
      a.min = *vlo;
      a.max = *vhi;
      a.step = *vst;
      a.validate();
      out.axes.push_back(a);
      continue;
    }
    if (t.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto fields = split(t, ',');
    if (fields.size() != out.axes.size() + 1) throw Error(ErrorKind::io, "lattice: row arity mismatch");
    auto v = parse_double(fields.back());
    if (!v) throw Error(ErrorKind::io, "lattice: bad value '" + fields.back() + "'");
    out.values.push_back(*v);
  }
  out.validate();
  return out;
}

}  // namespace granular::lattice
