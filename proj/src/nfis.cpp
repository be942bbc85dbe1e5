#include "granular/nfis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "granular/error.hpp"
#include "granular/kernels.hpp"
#include "granular/log.hpp"

namespace granular::nfis {

double TskRule::consequent(std::span<const double> x) const {
  double y = bias;
  for (std::size_t j = 0; j < coefficients.size(); ++j) y += coefficients[j] * x[j];
  return y;
}

void TskModel::validate() const {
  if (rules.empty()) throw Error(ErrorKind::shape, "tsk: model has no rules");
  for (const auto& r : rules) {
    if (r.premises.size() != inputs() || r.coefficients.size() != inputs())
      throw Error(ErrorKind::shape, "tsk: rule arity does not match model inputs");
    for (const auto& mf : r.premises)
      if (!(mf.sigma > 0.0)) throw Error(ErrorKind::shape, "tsk: premise sigma must be positive");
  }
}

namespace {

void check_arity(const TskModel& model, std::size_t n) {
  if (n != model.inputs())
    throw Error(ErrorKind::shape, "tsk: input has " + std::to_string(n) + " values, model expects " +
                                      std::to_string(model.inputs()));
}

double log_firing(const TskRule& rule, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - rule.premises[j].center;
    s -= d * d / (2.0 * rule.premises[j].sigma * rule.premises[j].sigma);
  }
  return s;
}

std::size_t strongest_rule(const TskModel& model, std::span<const double> x) {
  std::size_t best = 0;
  double best_lf = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < model.rules.size(); ++r) {
    const double lf = log_firing(model.rules[r], x);
    if (lf > best_lf) {
      best_lf = lf;
      best = r;
    }
  }
  return best;
}

std::vector<double> input_ranges(const Matrix& inputs) {
  std::vector<double> range(inputs.cols(), 1.0);
  if (inputs.empty()) return range;
  const auto scale = FeatureScale::fit(inputs);
  return scale.range;
}

}  // namespace

std::vector<double> normalized_firing(const TskModel& model, std::span<const double> input, bool* fallback) {
  check_arity(model, input.size());
  std::vector<double> w(model.rules.size());
  double total = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    double v = 1.0;
    for (std::size_t j = 0; j < input.size(); ++j) v *= model.rules[r].premises[j](input[j]);
    w[r] = v > kFiringFloor ? v : 0.0;
    total += w[r];
  }
  if (total > 0.0) {
    for (auto& v : w) v /= total;
    if (fallback) *fallback = false;
  } else {
    std::fill(w.begin(), w.end(), 0.0);
    w[strongest_rule(model, input)] = 1.0;
    if (fallback) *fallback = true;
  }
  return w;
}

Inference infer_detailed(const TskModel& model, std::span<const double> input) {
  check_arity(model, input.size());
  double num = 0.0, den = 0.0;
  for (const auto& rule : model.rules) {
    double w = 1.0;
    for (std::size_t j = 0; j < input.size(); ++j) w *= rule.premises[j](input[j]);
    if (w <= kFiringFloor) continue;
    num += w * rule.consequent(input);
    den += w;
  }
  if (den > 0.0) return {num / den, false};
  return {model.rules[strongest_rule(model, input)].consequent(input), true};
}

double infer(const TskModel& model, std::span<const double> input) { return infer_detailed(model, input).value; }

std::vector<double> infer_batch(const TskModel& model, const Matrix& inputs) {
  check_arity(model, inputs.cols());
  return kernels::map_rows(inputs, [&model](std::span<const double> x) { return infer(model, x); });
}

std::vector<double> infer_batch_serial(const TskModel& model, const Matrix& inputs) {
  check_arity(model, inputs.cols());
  return kernels::map_rows_serial(inputs, [&model](std::span<const double> x) { return infer(model, x); });
}

void SubtractiveConfig::validate() const {
  if (!(radius > 0.0 && radius <= 1.0)) throw Error(ErrorKind::configuration, "subtractive: radius must be in (0, 1]");
  if (!(quash_factor > 1.0)) throw Error(ErrorKind::configuration, "subtractive: quash factor must exceed 1");
  if (!(reject_ratio > 0.0 && reject_ratio < accept_ratio && accept_ratio <= 1.0))
    throw Error(ErrorKind::configuration, "subtractive: need 0 < reject < accept <= 1");
}

Matrix subtractive_cluster(const Matrix& data, const SubtractiveConfig& config) {
  config.validate();
  if (data.empty() || data.cols() == 0) throw Error(ErrorKind::clustering, "subtractive: empty data");
  const Matrix unit = FeatureScale::fit(data).to_unit(data);
  const double alpha = 4.0 / (config.radius * config.radius);
  const double rb = config.quash_factor * config.radius;
  const double beta = 4.0 / (rb * rb);

  std::vector<double> potential = kernels::density_potentials(unit, alpha);
  auto argmax = [&potential] {
    return static_cast<std::size_t>(std::max_element(potential.begin(), potential.end()) - potential.begin());
  };
  std::vector<std::size_t> centers;
  auto accept = [&](std::size_t k) {
    const double pk = potential[k];
    centers.push_back(k);
    for (std::size_t i = 0; i < unit.rows(); ++i)
      potential[i] -= pk * std::exp(-beta * squared_distance(unit.row(i), unit.row(k)));
  };

  const std::size_t first = argmax();
  const double reference = potential[first];
  accept(first);
  for (std::size_t guard = 0; guard < unit.rows(); ++guard) {
    const std::size_t k = argmax();
    const double pk = potential[k];
    if (!(pk > 0.0)) break;
    if (pk > config.accept_ratio * reference) {
      accept(k);
    } else if (pk < config.reject_ratio * reference) {
      break;
    } else {
      double dmin = std::numeric_limits<double>::infinity();
      for (auto c : centers) dmin = std::min(dmin, std::sqrt(squared_distance(unit.row(k), unit.row(c))));
      if (dmin / config.radius + pk / reference >= 1.0)
        accept(k);
      else
        potential[k] = 0.0;
    }
  }
  Matrix out(centers.size(), data.cols());
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (std::size_t j = 0; j < data.cols(); ++j) out(c, j) = data(centers[c], j);
  return out;
}

TskModel fit_consequents(TskModel model, const Matrix& inputs, std::span<const double> targets, FitInfo* info) {
  model.validate();
  check_arity(model, inputs.cols());
  if (inputs.rows() != targets.size()) throw Error(ErrorKind::shape, "tsk: input/target row mismatch");
  if (inputs.empty()) throw Error(ErrorKind::training, "tsk: empty training data");
  const std::size_t d = model.inputs();
  const std::size_t block = d + 1;
  const std::size_t cols = model.rules.size() * block;
  Eigen::MatrixXd phi(inputs.rows(), cols);
  Eigen::VectorXd y(inputs.rows());
  std::size_t fallback_rows = 0;
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    const auto x = inputs.row(i);
    bool fb = false;
    const auto w = normalized_firing(model, x, &fb);
    fallback_rows += fb;
    for (std::size_t r = 0; r < model.rules.size(); ++r) {
      for (std::size_t j = 0; j < d; ++j) phi(i, r * block + j) = w[r] * x[j];
      phi(i, r * block + d) = w[r];
    }
    y(i) = targets[i];
  }
  // Column equilibration keeps mixed-unit inputs well conditioned.
  Eigen::VectorXd norms = phi.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < norms.size(); ++c)
    if (norms(c) == 0.0) norms(c) = 1.0;
  const Eigen::MatrixXd scaled = phi * norms.cwiseInverse().asDiagonal();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(scaled);
  const Eigen::VectorXd theta = cod.solve(y).cwiseQuotient(norms);
  const bool deficient = cod.rank() < static_cast<Eigen::Index>(cols);
  if (deficient) log(LogLevel::debug, "tsk: rank-deficient consequent system, minimum-norm solution used");
  for (std::size_t r = 0; r < model.rules.size(); ++r) {
    for (std::size_t j = 0; j < d; ++j) model.rules[r].coefficients[j] = theta(static_cast<Eigen::Index>(r * block + j));
    model.rules[r].bias = theta(static_cast<Eigen::Index>(r * block + d));
  }
  if (info) {
    info->rank_deficient = deficient;
    info->fallback_rows = fallback_rows;
  }
  return model;
}

TskModel build_tsk_model(const Matrix& centers, const Matrix& inputs, std::span<const double> targets,
                         double radius, std::vector<std::string> input_names, FitInfo* info) {
  if (centers.empty()) throw Error(ErrorKind::training, "tsk: need at least one center");
  if (inputs.empty()) throw Error(ErrorKind::training, "tsk: empty training data");
  if (centers.cols() != inputs.cols()) throw Error(ErrorKind::shape, "tsk: center dimension mismatch");
  if (input_names.empty())
    for (std::size_t j = 0; j < inputs.cols(); ++j) input_names.push_back("x" + std::to_string(j));
  if (input_names.size() != inputs.cols()) throw Error(ErrorKind::shape, "tsk: input name count mismatch");
  const auto range = input_ranges(inputs);
  TskModel model;
  model.input_names = std::move(input_names);
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    TskRule rule;
    for (std::size_t j = 0; j < inputs.cols(); ++j) {
      const double sigma = std::max(radius * range[j] / std::sqrt(8.0), 1e-6 * range[j]);
      rule.premises.push_back({centers(c, j), sigma});
    }
    rule.coefficients.assign(inputs.cols(), 0.0);
    model.rules.push_back(std::move(rule));
  }
  return fit_consequents(std::move(model), inputs, targets, info);
}

TskModel grid_partition_model(const Matrix& inputs, std::span<const double> targets, std::size_t mfs_per_input,
                              std::vector<std::string> input_names, FitInfo* info) {
  if (mfs_per_input < 1) throw Error(ErrorKind::configuration, "tsk: need at least one MF per input");
  if (inputs.empty()) throw Error(ErrorKind::training, "tsk: empty training data");
  const std::size_t d = inputs.cols();
  const auto scale = FeatureScale::fit(inputs);
  std::size_t combos = 1;
  for (std::size_t j = 0; j < d; ++j) combos *= mfs_per_input;
  Matrix centers(combos, d);
  std::vector<double> sigma(d);
  for (std::size_t j = 0; j < d; ++j)
    sigma[j] = mfs_per_input > 1 ? scale.range[j] / (2.0 * static_cast<double>(mfs_per_input - 1)) : scale.range[j] / 2.0;
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rest = c;
    for (std::size_t j = d; j-- > 0;) {
      const std::size_t k = rest % mfs_per_input;
      rest /= mfs_per_input;
      const double u = mfs_per_input > 1 ? static_cast<double>(k) / static_cast<double>(mfs_per_input - 1) : 0.5;
      centers(c, j) = scale.from_unit(j, u);
    }
  }
  if (input_names.empty())
    for (std::size_t j = 0; j < d; ++j) input_names.push_back("x" + std::to_string(j));
  TskModel model;
  model.input_names = std::move(input_names);
  for (std::size_t c = 0; c < combos; ++c) {
    TskRule rule;
    for (std::size_t j = 0; j < d; ++j) rule.premises.push_back({centers(c, j), sigma[j]});
    rule.coefficients.assign(d, 0.0);
    model.rules.push_back(std::move(rule));
  }
  return fit_consequents(std::move(model), inputs, targets, info);
}

PremiseGradient premise_gradient(const TskModel& model, const Matrix& inputs, std::span<const double> targets) {
  check_arity(model, inputs.cols());
  const std::size_t d = model.inputs();
  const std::size_t rules = model.rules.size();
  PremiseGradient g{std::vector<double>(rules * d, 0.0), std::vector<double>(rules * d, 0.0)};
  std::vector<double> w(rules), f(rules);
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    const auto x = inputs.row(i);
    double total = 0.0, num = 0.0;
    for (std::size_t r = 0; r < rules; ++r) {
      double v = 1.0;
      for (std::size_t j = 0; j < d; ++j) v *= model.rules[r].premises[j](x[j]);
      w[r] = v > kFiringFloor ? v : 0.0;
      f[r] = model.rules[r].consequent(x);
      total += w[r];
      num += w[r] * f[r];
    }
    if (total <= 0.0) continue;  // fallback region: locally constant in the premises
    const double yhat = num / total;
    const double err = yhat - targets[i];
    for (std::size_t r = 0; r < rules; ++r) {
      if (w[r] == 0.0) continue;
      const double dy_dw = (f[r] - yhat) / total;
      for (std::size_t j = 0; j < d; ++j) {
        const auto& mf = model.rules[r].premises[j];
        const double diff = x[j] - mf.center;
        const double s2 = mf.sigma * mf.sigma;
        g.centers[r * d + j] += err * dy_dw * w[r] * diff / s2;
        g.sigmas[r * d + j] += err * dy_dw * w[r] * diff * diff / (s2 * mf.sigma);
      }
    }
  }
  return g;
}

double training_rmse(const TskModel& model, const Matrix& inputs, std::span<const double> targets) {
  const auto predicted = infer_batch(model, inputs);
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) sum += (predicted[i] - targets[i]) * (predicted[i] - targets[i]);
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

TrainReport train_tsk(const TskModel& model, const Matrix& inputs, std::span<const double> targets,
                      const TrainOptions& options) {
  model.validate();
  check_arity(model, inputs.cols());
  if (inputs.empty() || inputs.rows() != targets.size())
    throw Error(ErrorKind::training, "tsk: training data empty or mismatched");
  const auto range = input_ranges(inputs);
  const std::size_t d = model.inputs();

  TrainReport report;
  report.model = model;
  report.rmse_history.push_back(training_rmse(model, inputs, targets));
  double best = report.rmse_history.front();
  double previous = best;
  double step = options.step;
  TskModel current = model;
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    FitInfo info;
    current = fit_consequents(std::move(current), inputs, targets, &info);
    report.rank_deficient = report.rank_deficient || info.rank_deficient;
    const double e = training_rmse(current, inputs, targets);
    report.rmse_history.push_back(e);
    if (e < best) {
      best = e;
      report.model = current;
      report.best_epoch = epoch;
    }
    if (e > previous) step *= 0.5;
    previous = e;
    if (epoch == options.epochs) break;

    auto g = premise_gradient(current, inputs, targets);
    // Descend in unit-box coordinates so one step size fits mixed units.
    double norm2 = 0.0;
    for (std::size_t k = 0; k < g.centers.size(); ++k) {
      const double rj = range[k % d];
      for (double* v : {&g.centers[k], &g.sigmas[k]}) {
        if (!std::isfinite(*v)) {
          *v = 0.0;
          ++report.sigma_clamps;
        }
        *v *= rj;
        norm2 += *v * *v;
      }
    }
    if (!(norm2 > 0.0)) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t r = 0; r < current.rules.size(); ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        auto& mf = current.rules[r].premises[j];
        const std::size_t k = r * d + j;
        mf.center -= step * range[j] * g.centers[k] * inv;
        const double floor = 1e-6 * range[j];
        const double sigma = mf.sigma - step * range[j] * g.sigmas[k] * inv;
        if (!(sigma >= floor)) {
          mf.sigma = floor;
          ++report.sigma_clamps;
          log(LogLevel::debug, "tsk: sigma clamped to floor");
        } else {
          mf.sigma = sigma;
        }
      }
    }
  }
  return report;
}

}  // namespace granular::nfis
