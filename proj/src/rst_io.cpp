#include <json.hpp>

#include "granular/error.hpp"
#include "granular/rst.hpp"

namespace granular::rst {

using nlohmann::json;

std::string format_rule(const RoughRuleSet& set, const RoughRule& rule, std::string_view decision_label) {
  std::string out;
  for (std::size_t k = 0; k < rule.conditions.size(); ++k) {
    const auto& d = rule.conditions[k];
    const auto& schema = set.conditions.at(d.attribute);
    if (k) out += " & ";
    out += "(" + schema.name;
    if (d.values.size() == 1) {
      out += " = " + schema.label(d.values.front());
    } else {
      out += " in {";
      for (std::size_t v = 0; v < d.values.size(); ++v) {
        if (v) out += ", ";
        out += schema.label(d.values[v]);
      }
      out += "}";
    }
    out += ")";
  }
  if (rule.conditions.empty()) out += "TRUE";
  out += " ⇒ ";
  for (std::size_t k = 0; k < rule.decisions.size(); ++k) {
    if (k) out += " OR ";
    out += "(" + std::string(decision_label) + " = " + set.decision.label(rule.decisions[k]) + ")";
  }
  out += ";";
  return out;
}

std::string format_rules(const RoughRuleSet& set, std::string_view decision_label) {
  std::string out;
  for (std::size_t k = 0; k < set.rules.size(); ++k)
    out += std::to_string(k + 1) + "\t" + format_rule(set, set.rules[k], decision_label) + "\n";
  return out;
}

namespace {

json schema_json(const AttributeSchema& s) {
  json j{{"name", s.name}};
  if (!s.labels.empty()) j["labels"] = s.labels;
  return j;
}

AttributeSchema schema_from(const json& j) {
  AttributeSchema s;
  s.name = j.at("name").get<std::string>();
  if (j.contains("labels")) s.labels = j.at("labels").get<std::vector<std::string>>();
  return s;
}

}  // namespace

std::string rules_to_json(const RoughRuleSet& set) {
  json j;
  j["format"] = "granular.rules/1";
  j["strategy"] = to_string(set.strategy);
  j["df_universe"] = to_string(set.universe);
  j["fallback_code"] = set.fallback_code;
  j["decision"] = schema_json(set.decision);
  j["conditions"] = json::array();
  for (const auto& c : set.conditions) j["conditions"].push_back(schema_json(c));
  j["rules"] = json::array();
  for (const auto& r : set.rules) {
    json jr;
    jr["conditions"] = json::array();
    for (const auto& d : r.conditions)
      jr["conditions"].push_back({{"attribute", set.conditions.at(d.attribute).name}, {"values", d.values}});
    jr["decisions"] = r.decisions;
    jr["df"] = r.dependency_factor;
    jr["support"] = r.support;
    jr["text"] = format_rule(set, r);
    j["rules"].push_back(std::move(jr));
  }
  return j.dump(2) + "\n";
}

RoughRuleSet rules_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "granular.rules/1") throw Error(ErrorKind::io, "rules: unsupported format tag");
    RoughRuleSet set;
    set.strategy = parse_strategy(j.at("strategy").get<std::string>());
    set.universe = parse_df_universe(j.at("df_universe").get<std::string>());
    set.fallback_code = j.at("fallback_code").get<int>();
    set.decision = schema_from(j.at("decision"));
    for (const auto& c : j.at("conditions")) set.conditions.push_back(schema_from(c));
    for (const auto& jr : j.at("rules")) {
      RoughRule r;
      for (const auto& d : jr.at("conditions")) {
        const auto name = d.at("attribute").get<std::string>();
        std::size_t index = set.conditions.size();
        for (std::size_t a = 0; a < set.conditions.size(); ++a)
          if (set.conditions[a].name == name) index = a;
        if (index == set.conditions.size()) throw Error(ErrorKind::io, "rules: unknown attribute '" + name + "'");
        r.conditions.push_back({index, d.at("values").get<std::vector<int>>()});
      }
      r.decisions = jr.at("decisions").get<std::vector<int>>();
      if (r.decisions.empty()) throw Error(ErrorKind::io, "rules: rule without decisions");
      r.dependency_factor = jr.at("df").get<double>();
      r.support = jr.at("support").get<std::size_t>();
      set.rules.push_back(std::move(r));
    }
    return set;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, std::string("rules: malformed JSON: ") + e.what());
  }
}

}  // namespace granular::rst
