#include <sstream>

#include "granular/error.hpp"
#include "granular/format.hpp"
#include "granular/som.hpp"

namespace granular::som {

namespace {

void append_numbers(std::string& out, std::string_view tag, std::span<const double> values) {
  out += tag;
  for (double v : values) out += " " + format_double(v);
  out += "\n";
}

std::vector<std::string> words(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double number(const std::string& w) {
  auto v = parse_double(w);
  if (!v) throw Error(ErrorKind::io, "som grid: bad number '" + w + "'");
  return *v;
}

}  // namespace

std::string export_grid(const SomGrid& grid) {
  grid.validate();
  const auto& t = grid.topology;
  std::string out = "som-grid 1\n";
  out += "dims " + std::to_string(t.n1) + " " + std::to_string(t.n2) + "\n";
  out += std::string("neighborhood ") + (t.neighborhood == Neighborhood::gaussian ? "gaussian" : "bubble") + "\n";
  out += "schedule " + std::to_string(t.epochs) + " " + format_double(t.lr_initial) + " " + format_double(t.lr_final) +
         " " + format_double(t.initial_radius) + " " + format_double(t.final_radius) + " " + std::to_string(t.seed) + " " + format_double(t.ordering_fraction) + "\n";
  out += "features";
  for (const auto& n : grid.feature_names) {
    if (n.find_first_of(" \t\n") != std::string::npos)
      throw Error(ErrorKind::io, "som grid: feature name '" + n + "' contains whitespace");
    out += " " + n;
  }
  out += "\n";
  append_numbers(out, "scale_min", grid.scale.min);
  append_numbers(out, "scale_range", grid.scale.range);
  for (std::size_t k = 0; k < grid.neurons(); ++k) append_numbers(out, "prototype", grid.prototypes.row(k));
  return out;
}

SomGrid import_grid(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  SomGrid grid;
  bool header = false;
  while (std::getline(in, line)) {
    const auto w = words(line);
    if (w.empty() || w[0].front() == '#') continue;
    const auto& tag = w[0];
    if (tag == "som-grid") {
      if (w.size() != 2 || w[1] != "1") throw Error(ErrorKind::io, "som grid: unsupported version");
      header = true;
    } else if (tag == "dims" && w.size() == 3) {
      grid.topology.n1 = static_cast<std::size_t>(number(w[1]));
      grid.topology.n2 = static_cast<std::size_t>(number(w[2]));
    } else if (tag == "neighborhood" && w.size() == 2) {
      if (w[1] == "gaussian")
        grid.topology.neighborhood = Neighborhood::gaussian;
      else if (w[1] == "bubble")
        grid.topology.neighborhood = Neighborhood::bubble;
      else
        throw Error(ErrorKind::io, "som grid: unknown neighborhood '" + w[1] + "'");
    } else if (tag == "schedule" && w.size() == 8) {
      grid.topology.epochs = static_cast<std::size_t>(number(w[1]));
      grid.topology.lr_initial = number(w[2]);
      grid.topology.lr_final = number(w[3]);
      grid.topology.initial_radius = number(w[4]);
      grid.topology.final_radius = number(w[5]);
      auto seed = parse_integer(w[6]);
      grid.topology.seed = seed ? static_cast<std::uint64_t>(*seed) : std::stoull(w[6]);
      grid.topology.ordering_fraction = number(w[7]);
    } else if (tag == "features") {
      grid.feature_names.assign(w.begin() + 1, w.end());
    } else if (tag == "scale_min" || tag == "scale_range" || tag == "prototype") {
      std::vector<double> values;
      for (std::size_t k = 1; k < w.size(); ++k) values.push_back(number(w[k]));
      if (tag == "scale_min")
        grid.scale.min = values;
      else if (tag == "scale_range")
        grid.scale.range = values;
      else
        grid.prototypes.append_row(values);
    } else {
      throw Error(ErrorKind::io, "som grid: unexpected line '" + line + "'");
    }
  }
  if (!header) throw Error(ErrorKind::io, "som grid: missing header");
  grid.validate();
  return grid;
}

}  // namespace granular::som
