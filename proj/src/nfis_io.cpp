#include <sstream>

#include "granular/error.hpp"
#include "granular/format.hpp"
#include "granular/nfis.hpp"

namespace granular::nfis {

std::string export_model(const TskModel& model) {
  model.validate();
  std::string out = "tsk-model 1\n";
  out += "inputs";
  for (const auto& n : model.input_names) out += " " + n;
  out += "\noutput " + model.output_name + "\n";
  out += "rules " + std::to_string(model.rules.size()) + "\n";
  for (const auto& r : model.rules) {
    out += "premise";
    for (const auto& mf : r.premises) out += " " + format_double(mf.center) + " " + format_double(mf.sigma);
    out += "\nconsequent";
    for (double c : r.coefficients) out += " " + format_double(c);
    out += " " + format_double(r.bias) + "\n";
  }
  return out;
}

TskModel import_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  TskModel model;
  bool header = false;
  std::size_t declared = 0;
  auto numbers = [](std::istringstream& words) {
    std::vector<double> out;
    std::string w;
    while (words >> w) {
      auto v = parse_double(w);
      if (!v) throw Error(ErrorKind::io, "tsk model: bad number '" + w + "'");
      out.push_back(*v);
    }
    return out;
  };
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string tag;
    if (!(words >> tag) || tag.front() == '#') continue;
    if (tag == "tsk-model") {
      std::string version;
      words >> version;
      if (version != "1") throw Error(ErrorKind::io, "tsk model: unsupported version");
      header = true;
    } else if (tag == "inputs") {
      std::string n;
      while (words >> n) model.input_names.push_back(n);
    } else if (tag == "output") {
      words >> model.output_name;
    } else if (tag == "rules") {
      words >> declared;
    } else if (tag == "premise") {
      const auto v = numbers(words);
      if (v.size() != 2 * model.inputs()) throw Error(ErrorKind::io, "tsk model: premise arity mismatch");
      TskRule rule;
      for (std::size_t j = 0; j < model.inputs(); ++j) rule.premises.push_back({v[2 * j], v[2 * j + 1]});
      model.rules.push_back(std::move(rule));
    } else if (tag == "consequent") {
      const auto v = numbers(words);
      if (model.rules.empty() || v.size() != model.inputs() + 1)
        throw Error(ErrorKind::io, "tsk model: consequent arity mismatch");
      auto& rule = model.rules.back();
      rule.coefficients.assign(v.begin(), v.end() - 1);
      rule.bias = v.back();
    } else {
      throw Error(ErrorKind::io, "tsk model: unexpected line '" + line + "'");
    }
  }
  if (!header) throw Error(ErrorKind::io, "tsk model: missing header");
  if (declared != model.rules.size()) throw Error(ErrorKind::io, "tsk model: rule count mismatch");
  model.validate();
  return model;
}

}  // namespace granular::nfis
