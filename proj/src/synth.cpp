#include "granular/synth.hpp"

#include <algorithm>
#include <cmath>

#include "granular/error.hpp"
#include "granular/random.hpp"

namespace granular::synth {

Preset parse_preset(std::string_view name) {
  if (name == "dam5") return Preset::dam5;
  if (name == "xyz") return Preset::xyz;
  throw Error(ErrorKind::usage, "unknown preset '" + std::string(name) + "' (expected dam5 or xyz)");
}

namespace {

double round_to(double v, double unit) { return std::round(v / unit) * unit; }

struct Borehole {
  double x, y, collar;
  bool reversed;
};

}  // namespace

DecisionTable generate(Preset preset, std::size_t n_objects, std::uint64_t seed, const SynthOptions& options) {
  if (n_objects == 0) throw Error(ErrorKind::usage, "synth: object count must be positive");
  if (options.boreholes == 0) throw Error(ErrorKind::usage, "synth: borehole count must be positive");
  if (options.reversed_fraction < 0.0 || options.reversed_fraction > 1.0)
    throw Error(ErrorKind::usage, "synth: reversed fraction must be in [0, 1]");

  Rng rng(seed);
  std::vector<Borehole> holes;
  for (std::size_t b = 0; b < options.boreholes; ++b) {
    holes.push_back({round_to(rng.uniform(0.0, 400.0), 0.1), round_to(rng.uniform(0.0, 300.0), 0.1),
                     1250.0 + rng.uniform(-20.0, 20.0), rng.uniform() < options.reversed_fraction});
  }

  std::vector<Attribute> attributes;
  if (preset == Preset::dam5) {
    attributes = {{"z", Role::condition, Kind::numeric},
                  {"l", Role::condition, Kind::numeric},
                  {"rqd", Role::condition, Kind::numeric},
                  {"twr", Role::condition, Kind::symbolic},
                  {"lugeon", Role::decision, Kind::numeric}};
  } else {
    attributes = {{"x", Role::condition, Kind::numeric},
                  {"y", Role::condition, Kind::numeric},
                  {"z", Role::condition, Kind::numeric},
                  {"lugeon", Role::decision, Kind::numeric}};
  }

  const auto& codes = twr_codes();
  std::vector<std::string> ids;
  std::vector<std::vector<Cell>> rows;
  for (std::size_t i = 0; i < n_objects; ++i) {
    const auto& hole = holes[i % holes.size()];
    const double k = static_cast<double>(i / holes.size());
    const double depth = 2.0 + 5.0 * k + rng.uniform(0.0, 2.0);
    const double z = round_to(hole.collar - depth, 0.01);
    const double length = round_to(3.0 + 3.0 * rng.uniform(), 0.5);

    const double w = std::clamp(4.0 * std::exp(-depth / 40.0) + 0.4 * rng.normal(), 0.0, 4.0);
    const auto nearest = std::min_element(codes.begin(), codes.end(), [w](const auto& a, const auto& b) {
      return std::abs(a.second - w) < std::abs(b.second - w);
    });
    const double rqd = round_to(std::clamp(95.0 - 18.0 * nearest->second + 10.0 * rng.normal(), 0.0, 100.0), 1.0);
    const double log_lu = hole.reversed ? -0.3 + 0.012 * rqd + 0.25 * rng.normal()
                                        : 1.2 - 0.015 * rqd + 0.1 * nearest->second + 0.25 * rng.normal();
    const double lugeon = round_to(std::pow(10.0, log_lu), 0.01);

    ids.push_back("b" + std::to_string(i % holes.size() + 1) + "-" + std::to_string(i / holes.size() + 1));
    if (preset == Preset::dam5) {
      rows.push_back({z, length, rqd, nearest->first, lugeon});
    } else {
      const double x = round_to(hole.x + rng.uniform(-1.0, 1.0), 0.01);
      const double y = round_to(hole.y + rng.uniform(-1.0, 1.0), 0.01);
      rows.push_back({x, y, z, lugeon});
    }
  }
  return DecisionTable(std::move(ids), std::move(attributes), std::move(rows));
}

}  // namespace granular::synth
