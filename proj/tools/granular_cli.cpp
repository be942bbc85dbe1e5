#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "granular/data.hpp"
#include "granular/error.hpp"
#include "granular/format.hpp"
#include "granular/lattice.hpp"
#include "granular/log.hpp"
#include "granular/nfis.hpp"
#include "granular/rst.hpp"
#include "granular/som.hpp"
#include "granular/sonfis.hpp"
#include "granular/sorst.hpp"
#include "granular/synth.hpp"
#include "manifest.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace granular;
using cli::Manifest;
using cli::RunConfig;

namespace {

struct Paths {
  std::string input, train, test, model;
  std::vector<std::string> axes;
};

struct Context {
  std::string command;
  RunConfig cfg;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  Manifest manifest{"", 0};

  void write(const std::string& name, const std::string& content) { manifest.write_output(out_dir, name, content); }
  void finish() { manifest.write(out_dir, cfg.canonical()); }
};

std::string require_path(const std::string& value, const std::string& flag) {
  if (value.empty()) throw Error(ErrorKind::usage, "missing required " + flag);
  return value;
}

// Peeks at the header to decide whether an "id" column carries object ids.
std::string detect_id_column(const std::string& content, const std::string& wanted) {
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    for (const auto& h : split(t, ',')) if (std::string(trim(h)) == wanted) return wanted;
    return "";
  }
  return "";
}

DecisionTable load_table(Context& ctx, const std::string& role, const std::string& path) {
  const auto content = ctx.manifest.add_input(role, path);
  LoadOptions opt;
  const auto decision = ctx.cfg.text("decision", "lugeon");
  if (!decision.empty()) opt.roles[decision] = Role::decision;
  opt.id_column = detect_id_column(content, ctx.cfg.text("id_column", "id"));
  try {
    return load_decision_table(content, opt);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

// Weathering labels become codes for the numeric pipelines.
DecisionTable numeric_view(Context& ctx, const DecisionTable& table) {
  const auto column = ctx.cfg.text("twr_column", "twr");
  for (const auto& a : table.attributes())
    if (a.name == column && a.kind == Kind::symbolic) return encode_twr_column(table, column);
  return table;
}

som::Neighborhood parse_neighborhood(const std::string& s) {
  if (s == "gaussian") return som::Neighborhood::gaussian;
  if (s == "bubble") return som::Neighborhood::bubble;
  throw Error(ErrorKind::configuration, "unknown neighborhood '" + s + "' (gaussian, bubble)");
}

nfis::SubtractiveConfig subtractive_from(RunConfig& cfg) {
  nfis::SubtractiveConfig s;
  s.radius = cfg.real("radius", s.radius);
  s.quash_factor = cfg.real("quash_factor", s.quash_factor);
  s.accept_ratio = cfg.real("accept_ratio", s.accept_ratio);
  s.reject_ratio = cfg.real("reject_ratio", s.reject_ratio);
  s.validate();
  return s;
}

struct Xy {
  Matrix x;
  std::vector<double> y;
};

Xy split_xy(const DecisionTable& t) {
  const auto d = t.decision_index();
  if (!d) throw Error(ErrorKind::configuration, "table has no decision attribute");
  const auto cond = t.condition_indices();
  return {t.numeric_matrix(cond), t.numeric_column(*d)};
}

std::string rmse_csv(const std::vector<double>& history) {
  std::string out = "epoch,rmse\n";
  for (std::size_t e = 0; e < history.size(); ++e) out += std::to_string(e) + "," + format_double(history[e]) + "\n";
  return out;
}

std::string predictions_csv(const std::vector<std::string>& ids, const std::vector<double>& actual,
                            const std::vector<double>& predicted) {
  std::string out = "id,actual,predicted\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    out += ids[i] + "," + format_double(actual[i]) + "," + format_double(predicted[i]) + "\n";
  return out;
}

// xyz-style tables default to five classes.
std::size_t default_levels_for(const DecisionTable& table) {
  auto names = table.condition_names();
  std::sort(names.begin(), names.end());
  return names == std::vector<std::string>{"x", "y", "z"} ? 5 : 3;
}

void fill_levels(RunConfig& cfg, sorst::SorstConfig& sc, const DecisionTable& table) {
  sc.default_levels = cfg.count("default_levels", default_levels_for(table));
  for (const auto& [name, value] : cfg.with_prefix("levels")) {
    auto v = parse_integer(value);
    if (!v || *v < 1) throw Error(ErrorKind::configuration, "config key 'levels." + name + "': expected a positive integer");
    sc.levels_per_attribute[name] = static_cast<std::size_t>(*v);
  }
}

// ---- commands ----

void cmd_synth(Context& ctx, const Paths&) {
  const auto preset = synth::parse_preset(ctx.cfg.text("preset", "dam5"));
  const auto n = ctx.cfg.count("n", 789);
  synth::SynthOptions opt;
  opt.boreholes = ctx.cfg.count("boreholes", opt.boreholes);
  opt.reversed_fraction = ctx.cfg.real("reversed_fraction", opt.reversed_fraction);
  ctx.cfg.reject_unused();
  ctx.write("data.csv", write_decision_table(synth::generate(preset, n, ctx.seed, opt)));
}

void cmd_split(Context& ctx, const Paths& p) {
  const auto table = load_table(ctx, "data", require_path(p.input, "--input"));
  const auto n_train = ctx.cfg.count("n_train", 600);
  const auto n_test = ctx.cfg.count("n_test", 93);
  ctx.cfg.reject_unused();
  const auto s = split_train_test(table, n_train, n_test, ctx.seed);
  ctx.write("train.csv", write_decision_table(s.train));
  ctx.write("test.csv", write_decision_table(s.test));
}

void cmd_som_train(Context& ctx, const Paths& p) {
  const auto table = numeric_view(ctx, load_table(ctx, "data", require_path(p.input, "--input")));
  som::SomTopology topo;
  const auto dims = sonfis::grid_dims(ctx.cfg.count("neurons", 25));
  topo.n1 = ctx.cfg.count("n1", dims.n1);
  topo.n2 = ctx.cfg.count("n2", dims.n2);
  topo.neighborhood = parse_neighborhood(ctx.cfg.text("neighborhood", "gaussian"));
  topo.epochs = ctx.cfg.count("epochs", 200);
  topo.lr_initial = ctx.cfg.real("lr_initial", topo.lr_initial);
  topo.lr_final = ctx.cfg.real("lr_final", topo.lr_final);
  topo.initial_radius = ctx.cfg.real("initial_radius", topo.initial_radius);
  topo.final_radius = ctx.cfg.real("final_radius", topo.final_radius);
  topo.ordering_fraction = ctx.cfg.real("ordering_fraction", topo.ordering_fraction);
  topo.seed = ctx.seed;
  ctx.cfg.reject_unused();

  std::vector<std::string> names;
  for (const auto& a : table.attributes()) names.push_back(a.name);
  const auto data = table.numeric_matrix();
  const auto grid = som::train_som(data, topo, names);
  const auto granules = som::crisp_granulate(grid, table);

  std::string assignment = "id,neuron\n";
  for (std::size_t i = 0; i < table.size(); ++i)
    assignment += table.object_ids()[i] + "," + std::to_string(granules.assignment[i]) + "\n";
  std::string report = "som-train\n";
  report += "lattice " + std::to_string(topo.n1) + "x" + std::to_string(topo.n2) + "\n";
  report += "objects " + std::to_string(table.size()) + "\n";
  report += "granules " + std::to_string(granules.granule_neuron.size()) + "\n";
  report += "quantization_error " + format_double(som::quantization_error(grid, data)) + "\n";

  ctx.write("som_grid.txt", som::export_grid(grid));
  ctx.write("granules.csv", write_decision_table(granules.prototypes_table));
  ctx.write("assignment.csv", assignment);
  ctx.write("report.txt", report);
}

void cmd_nfis_train(Context& ctx, const Paths& p) {
  const auto train = numeric_view(ctx, load_table(ctx, "train", require_path(p.train.empty() ? p.input : p.train, "--train")));
  std::optional<DecisionTable> test;
  if (!p.test.empty()) test = numeric_view(ctx, load_table(ctx, "test", p.test));
  const auto seeding = ctx.cfg.text("seeding", "subtractive");
  const auto target_rules = ctx.cfg.count("rules", 0);
  const auto mfs = ctx.cfg.count("mfs", 2);
  const auto sub = subtractive_from(ctx.cfg);
  nfis::TrainOptions topt;
  topt.epochs = ctx.cfg.count("epochs", topt.epochs);
  topt.step = ctx.cfg.real("step", topt.step);
  ctx.cfg.reject_unused();

  const auto [x, y] = split_xy(train);
  const auto names = train.condition_names();
  nfis::TskModel seed_model;
  if (seeding == "subtractive") {
    auto s = sonfis::seed_rules(x, y, target_rules, sub);
    seed_model = nfis::build_tsk_model(s.centers, x, y, s.radius, names);
  } else if (seeding == "grid") {
    seed_model = nfis::grid_partition_model(x, y, mfs, names);
  } else {
    throw Error(ErrorKind::configuration, "unknown seeding '" + seeding + "' (subtractive, grid)");
  }
  seed_model.output_name = train.attributes()[*train.decision_index()].name;
  const auto rep = nfis::train_tsk(seed_model, x, y, topt);

  std::string report = "nfis-train\n";
  report += "rules " + std::to_string(rep.model.rules.size()) + "\n";
  report += "best_epoch " + std::to_string(rep.best_epoch) + "\n";
  report += "train_rmse " + format_double(nfis::training_rmse(rep.model, x, y)) + "\n";
  if (rep.rank_deficient) report += "note rank-deficient least squares\n";
  ctx.write("tsk_model.txt", nfis::export_model(rep.model));
  ctx.write("training_rmse.csv", rmse_csv(rep.rmse_history));
  if (test) {
    const auto [tx, ty] = split_xy(*test);
    const auto pred = nfis::infer_batch(rep.model, tx);
    report += "test_rmse " + format_double(rmse(pred, ty)) + "\n";
    ctx.write("predictions.csv", predictions_csv(test->object_ids(), ty, pred));
  }
  ctx.write("report.txt", report);
}

void cmd_rst_rules(Context& ctx, const Paths& p) {
  const auto raw = load_table(ctx, "data", require_path(p.input, "--input"));
  rst::InductionOptions opt;
  opt.strategy = rst::parse_strategy(ctx.cfg.text("strategy", "minimal"));
  opt.exact_only = ctx.cfg.flag("exact_only", true);
  opt.strength_threshold = ctx.cfg.real("strength_threshold", 0.0);
  opt.universe = rst::parse_df_universe(ctx.cfg.text("df_universe", "whole"));
  opt.merge_value_sets = ctx.cfg.flag("merge", true);
  const bool discretize = ctx.cfg.flag("discretize", false);

  sorst::RoughModel model;
  rst::SymbolicTable table = [&] {
    if (!discretize) return rst::SymbolicTable::from_decision_table(raw);
    sorst::SorstConfig sc;
    const auto numeric = numeric_view(ctx, raw);
    fill_levels(ctx.cfg, sc, numeric);
    sc.seed = ctx.seed;
    auto d = sorst::discretize_table(numeric, sc);
    model.level_maps = d.level_maps;
    return std::move(d.table);
  }();
  ctx.cfg.reject_unused();

  model.rules = rst::induce_rules(table, opt);
  ctx.write("rules.txt", rst::format_rules(model.rules));
  ctx.write("rules.json", sorst::rough_model_to_json(model));
}

void cmd_sonfis(Context& ctx, const Paths& p) {
  const auto train = numeric_view(ctx, load_table(ctx, "train", require_path(p.train, "--train")));
  const auto test = numeric_view(ctx, load_table(ctx, "test", require_path(p.test, "--test")));
  auto& c = ctx.cfg;
  sonfis::SonfisConfig sc;
  sc.neuron_min = c.count("neuron_min", sc.neuron_min);
  sc.neuron_max = c.count("neuron_max", sc.neuron_max);
  sc.max_rules = c.count("max_rules", sc.max_rules);
  sc.iterations = c.count("iterations", sc.iterations);
  sc.mode = sonfis::parse_growth_mode(c.text("mode", "random"));
  sc.alpha = c.real("alpha", sc.alpha);
  sc.beta = c.real("beta", sc.beta);
  sc.gamma = c.real("gamma", sc.gamma);
  sc.initial_neurons = c.count("initial_neurons", sc.initial_neurons);
  sc.error_target = c.real("error_target", sc.error_target);
  sc.criterion = sonfis::parse_criterion(c.text("criterion", "min_error"));
  sc.som_epochs = c.count("som_epochs", sc.som_epochs);
  sc.som_lr_initial = c.real("som_lr_initial", sc.som_lr_initial);
  sc.som_lr_final = c.real("som_lr_final", sc.som_lr_final);
  sc.subtractive = subtractive_from(c);
  sc.tsk_epochs = c.count("tsk_epochs", sc.tsk_epochs);
  sc.tsk_step = c.real("tsk_step", sc.tsk_step);
  sc.seed = ctx.seed;
  const double durability_tol = c.real("durability_tolerance", 1.0);
  const auto hole_window = c.count("hole_window", 3);
  const double hole_neurons = c.real("hole_neuron_tolerance", 2.0);
  const double hole_error = c.real("hole_error_tolerance", 0.05);
  c.reject_unused();
  sc.validate();

  const auto result = sonfis::run_sonfis(train, test, sc);
  const auto& trace = result.trace;
  const auto& best = trace.records[trace.best_index];

  std::string report = "sonfis\n";
  report += "mode " + std::string(sc.mode == sonfis::GrowthMode::random ? "random" : "adaptive") + "\n";
  report += "criterion " + std::string(sonfis::to_string(sc.criterion)) + "\n";
  report += "iterations " + std::to_string(trace.records.size()) + "\n";
  for (const auto& r : trace.records) {
    report += "  t=" + std::to_string(r.t) + " neurons=" + std::to_string(r.neuron_count) + " (" +
              std::to_string(r.n1) + "x" + std::to_string(r.n2) + ") granules=" + std::to_string(r.granule_count) +
              " rules=" + std::to_string(r.rule_count) + " rmse=" + format_double(r.test_error);
    if (r.failed) report += " FAILED: " + r.failure;
    report += "\n";
  }
  report += "best t=" + std::to_string(best.t) + " neurons=" + std::to_string(best.neuron_count) +
            " rules=" + std::to_string(best.rule_count) + " rmse=" + format_double(best.test_error) + "\n";
  report += "durability (anchor: longest run)\n";
  for (const auto& [n, run] : sonfis::neuron_durability(trace, durability_tol))
    report += "  " + std::to_string(n) + ": " + std::to_string(run) + "\n";
  if (auto hole = sonfis::detect_balance_hole(trace, hole_window, hole_neurons, hole_error))
    report += "balance_hole start=" + std::to_string(hole->start) + " neurons=" + format_double(hole->neurons) +
              " rmse=" + format_double(hole->error) + "\n";
  else
    report += "balance_hole none\n";

  const auto [tx, ty] = split_xy(test);
  ctx.write("trace.csv", sonfis::trace_to_csv(trace));
  ctx.write("best_model.txt", nfis::export_model(result.best_model));
  ctx.write("best_grid.txt", som::export_grid(result.best_grid));
  ctx.write("predictions.csv", predictions_csv(test.object_ids(), ty, nfis::infer_batch(result.best_model, tx)));
  ctx.write("report.txt", report);
}

void cmd_sorst(Context& ctx, const Paths& p) {
  const auto train = numeric_view(ctx, load_table(ctx, "train", require_path(p.train, "--train")));
  const auto test = numeric_view(ctx, load_table(ctx, "test", require_path(p.test, "--test")));
  auto& c = ctx.cfg;
  sorst::SorstConfig sc;
  fill_levels(c, sc, train);
  sc.neuron_min = c.count("neuron_min", sc.neuron_min);
  sc.neuron_max = c.count("neuron_max", sc.neuron_max);
  sc.structures = c.count("structures", sc.structures);
  sc.strength_threshold = c.real("strength_threshold", sc.strength_threshold);
  sc.exact_only = c.flag("exact_only", sc.exact_only);
  const auto fallback = c.integer("fallback_code", 4);
  sc.fallback_code = static_cast<int>(fallback);
  sc.strategy = rst::parse_strategy(c.text("strategy", rst::to_string(sc.strategy)));
  sc.universe = rst::parse_df_universe(c.text("df_universe", rst::to_string(sc.universe)));
  sc.fit_levels_on_raw = c.flag("fit_levels_on_raw", sc.fit_levels_on_raw);
  sc.adaptive_strength = c.flag("adaptive_strength", sc.adaptive_strength);
  sc.strength_decay = c.real("strength_decay", sc.strength_decay);
  sc.strength_floor = c.real("strength_floor", sc.strength_floor);
  sc.som_epochs = c.count("som_epochs", sc.som_epochs);
  sc.parallel = c.flag("parallel", sc.parallel);
  sc.seed = ctx.seed;
  c.reject_unused();
  sc.validate();

  const auto result = sorst::run_sorst(train, test, sc);
  std::string report = "sorst\n";
  report += "structures " + std::to_string(result.records.size()) + "\n";
  report += "threshold_schedule";
  for (double t : result.threshold_schedule) report += " " + format_double(t);
  report += "\n";
  for (const auto& r : result.records) {
    report += "  structure=" + std::to_string(r.index) + " neurons=" + std::to_string(r.neuron_count) + " (" +
              std::to_string(r.n1) + "x" + std::to_string(r.n2) + ") granules=" + std::to_string(r.granule_count) +
              " rules=" + std::to_string(r.rule_set.rules.size()) + " best_df=" + format_double(r.best_df);
    if (r.rejected)
      report += " REJECTED";
    else
      report += " mse=" + format_double(r.test_mse) + " unmatched=" + std::to_string(r.unmatched);
    if (!r.note.empty()) report += " (" + r.note + ")";
    report += "\n";
  }
  ctx.write("structures.csv", sorst::structures_to_csv(result));
  if (result.empty()) {
    report += "status empty\n" + result.diagnostics + "\n";
    log(LogLevel::warning, "sorst: every structure was rejected; see report.txt");
  } else {
    const auto& best = result.records[*result.best_index];
    report += "status ok\nbest structure=" + std::to_string(best.index) + " mse=" + format_double(best.test_mse) + "\n";
    report += "rules\n" + rst::format_rules(best.rule_set);
    ctx.write("rules.txt", rst::format_rules(best.rule_set));
    ctx.write("rules.json", sorst::rough_model_to_json({best.rule_set, best.level_maps}));
    ctx.write("predictions.csv", sorst::predictions_to_csv(best, test.object_ids(), sc.fallback_code));
  }
  ctx.write("report.txt", report);
}

void cmd_predict_grid(Context& ctx, const Paths& p) {
  const auto path = require_path(p.model, "--model");
  const auto text = ctx.manifest.add_input("model", path);
  std::vector<std::string> specs = p.axes;
  const auto from_config = ctx.cfg.text("axes", "");
  for (const auto& s : split(from_config, ';'))
    if (!trim(s).empty()) specs.emplace_back(trim(s));
  if (specs.empty() || specs.size() > 3) throw Error(ErrorKind::usage, "predict-grid needs 1 to 3 --axis name:min:max:step");
  std::vector<lattice::AxisSpec> axes;
  for (const auto& s : specs) axes.push_back(lattice::parse_axis(s));
  const auto ftrim = trim(text);
  const bool rough = !ftrim.empty() && ftrim.front() == '{';

  lattice::PredictionLattice out;
  std::string value_name;
  try {
    if (rough) {
      const auto model = sorst::rough_model_from_json(text);
      const auto arity = model.rules.conditions.size();
      if (arity != axes.size())
        throw Error(ErrorKind::shape, "rule set has " + std::to_string(arity) + " condition attributes, lattice has " +
                                          std::to_string(axes.size()) + " axes");
      std::size_t levels = model.rules.decision.labels.size();
      for (std::size_t k = 0; k < model.level_maps.attributes.size(); ++k)
        if (model.level_maps.attributes[k] == model.rules.decision.name) levels = model.level_maps.maps[k].size();
      const auto unknown = static_cast<double>(ctx.cfg.integer("unknown_code", levels + 1));
      ctx.cfg.reject_unused();
      value_name = model.rules.decision.name.empty() ? "class" : model.rules.decision.name;
      out = lattice::evaluate(axes, [&](std::span<const double> node) {
        const auto c = sorst::classify_raw(model, node);
        return c ? static_cast<double>(*c) : unknown;
      });
    } else {
      const auto model = nfis::import_model(text);
      if (model.inputs() != axes.size())
        throw Error(ErrorKind::shape, "model has " + std::to_string(model.inputs()) + " inputs, lattice has " +
                                          std::to_string(axes.size()) + " axes");
      ctx.cfg.reject_unused();
      value_name = model.output_name;
      out = lattice::evaluate(axes, [&](std::span<const double> node) { return nfis::infer(model, node); });
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw Error(e.kind(), path + ": " + e.what());
    throw;
  }
  ctx.write("lattice.csv", lattice::to_csv(out, value_name));
}

void cmd_divergence(Context& ctx, const Paths& p) {
  const auto path = require_path(p.input, "--input");
  const auto text = ctx.manifest.add_input("lattice", path);
  ctx.cfg.reject_unused();
  lattice::PredictionLattice in;
  try {
    in = lattice::from_csv(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
  ctx.write("divergence.csv", lattice::to_csv(lattice::divergence(in), "divergence"));
}

LogLevel parse_log_level(const std::string& s) {
  if (s == "debug") return LogLevel::debug;
  if (s == "info") return LogLevel::info;
  if (s == "warning") return LogLevel::warning;
  if (s == "silent") return LogLevel::silent;
  throw Error(ErrorKind::usage, "unknown log level '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Granular computing toolkit: SOM granulation, TSK inference, rough-set rules"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string config_path, out_dir = ".", log_level = "warning";
  std::vector<std::string> sets;
  app.add_option("--seed", seed, "Random seed (overrides the config's seed key)");
  app.add_option("--config", config_path, "Parameter file of key = value lines");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--set", sets, "Parameter override key=value (repeatable)");
  app.add_option("--log-level", log_level, "debug, info, warning or silent");

  Paths paths;
  using Handler = void (*)(Context&, const Paths&);
  std::vector<std::pair<CLI::App*, Handler>> commands;
  auto add = [&](const char* name, const char* help, Handler h) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    commands.emplace_back(sub, h);
    return sub;
  };

  std::optional<std::size_t> n;
  std::string preset;
  auto* synth_cmd = add("synth", "Generate a synthetic borehole table (data.csv)", cmd_synth);
  synth_cmd->add_option("--n", n, "Object count");
  synth_cmd->add_option("--preset", preset, "dam5 or xyz");

  add("split", "Seeded train/test split (train.csv, test.csv)", cmd_split)->add_option("--input", paths.input)->required();
  add("som-train", "Train a SOM and granulate a table", cmd_som_train)->add_option("--input", paths.input)->required();
  auto* nfis_cmd = add("nfis-train", "Seed and train a TSK model", cmd_nfis_train);
  nfis_cmd->add_option("--train", paths.train)->required();
  nfis_cmd->add_option("--test", paths.test);
  add("rst-rules", "Induce rough-set rules from a table", cmd_rst_rules)->add_option("--input", paths.input)->required();
  for (auto [name, help, h] : {std::tuple{"sonfis", "SOM + NFIS balancing loop", cmd_sonfis},
                               std::tuple{"sorst", "SOM + rough-set balancing over random structures", cmd_sorst}}) {
    auto* sub = add(name, help, h);
    sub->add_option("--train", paths.train)->required();
    sub->add_option("--test", paths.test)->required();
  }
  auto* grid_cmd = add("predict-grid", "Evaluate a TSK model or rough model on a lattice", cmd_predict_grid);
  grid_cmd->add_option("--model", paths.model)->required();
  grid_cmd->add_option("--axis", paths.axes, "name:min:max:step, one per axis");
  add("divergence", "Divergence of the gradient of a lattice field", cmd_divergence)
      ->add_option("--input", paths.input)
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    set_log_level(parse_log_level(log_level));
    Context ctx;
    ctx.cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::usage, "--set expects key=value, got '" + s + "'");
      ctx.cfg.set(std::string(trim(s.substr(0, eq))), std::string(trim(s.substr(eq + 1))));
    }
    if (n) ctx.cfg.set("n", std::to_string(*n));
    if (!preset.empty()) ctx.cfg.set("preset", preset);
    if (seed) ctx.cfg.set("seed", std::to_string(*seed));
    ctx.seed = ctx.cfg.integer("seed", 0);
    ctx.out_dir = out_dir;
    for (auto& [sub, handler] : commands) {
      if (!sub->parsed()) continue;
      ctx.command = sub->get_name();
      ctx.manifest = Manifest(ctx.command, ctx.seed);
      handler(ctx, paths);
      ctx.finish();
    }
  } catch (const Error& e) {
    std::cerr << "granular: error: " << e.what() << "\n";
    return e.kind() == ErrorKind::usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "granular: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
