#pragma once

#include <cstdint>
#include <string>

#include "granular/data.hpp"

namespace granular::synth {

enum class Preset {
  dam5,  // z, l, rqd, twr (weathering label), lugeon
  xyz,   // x, y, z, lugeon
};

Preset parse_preset(std::string_view name);

struct SynthOptions {
  std::size_t boreholes = 20;
  /// Fraction of boreholes where lugeon rises with RQD instead of falling.
  double reversed_fraction = 0.3;
};

/// Borehole-style permeability records. lugeon is the decision attribute.
DecisionTable generate(Preset preset, std::size_t n_objects, std::uint64_t seed, const SynthOptions& options = {});

}  // namespace granular::synth
