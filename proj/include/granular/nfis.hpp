#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "granular/matrix.hpp"

namespace granular::nfis {

struct GaussianMf {
  double center = 0.0;
  double sigma = 1.0;

  double operator()(double x) const {
    const double d = x - center;
    return std::exp(-d * d / (2.0 * sigma * sigma));
  }
  bool operator==(const GaussianMf&) const = default;
};

/// IF x_1 is A_1 and ... THEN y = sum_j a_j x_j + bias.
struct TskRule {
  std::vector<GaussianMf> premises;
  std::vector<double> coefficients;
  double bias = 0.0;

  double consequent(std::span<const double> x) const;
  bool operator==(const TskRule&) const = default;
};

struct TskModel {
  std::vector<TskRule> rules;
  std::vector<std::string> input_names;
  std::string output_name = "y";

  std::size_t inputs() const noexcept { return input_names.size(); }
  void validate() const;
  bool operator==(const TskModel&) const = default;
};

/// Firing strengths at or below this are treated as zero.
inline constexpr double kFiringFloor = 1e-300;

struct Inference {
  double value = 0.0;
  /// Set when every rule underflowed and the nearest-premise rule answered.
  bool fallback = false;
};

Inference infer_detailed(const TskModel& model, std::span<const double> input);
double infer(const TskModel& model, std::span<const double> input);

/// Normalized firing strengths (sum to 1). Falls back to a one-hot vector on
/// the rule with the largest log-firing when all strengths underflow.
std::vector<double> normalized_firing(const TskModel& model, std::span<const double> input,
                                      bool* fallback = nullptr);

std::vector<double> infer_batch(const TskModel& model, const Matrix& inputs);
std::vector<double> infer_batch_serial(const TskModel& model, const Matrix& inputs);

struct SubtractiveConfig {
  double radius = 0.5;
  double quash_factor = 1.25;
  double accept_ratio = 0.5;
  double reject_ratio = 0.15;

  void validate() const;
};

/// Potential-based cluster centers, returned in data units. Centers are
/// data points; the data is normalized to the unit box internally.
Matrix subtractive_cluster(const Matrix& data, const SubtractiveConfig& config);

struct FitInfo {
  bool rank_deficient = false;
  std::size_t fallback_rows = 0;
};

/// One rule per center. Premise sigmas are radius * range / sqrt(8) per input;
/// consequents are the least-squares fit on normalized firing strengths.
TskModel build_tsk_model(const Matrix& centers, const Matrix& inputs, std::span<const double> targets,
                         double radius, std::vector<std::string> input_names = {}, FitInfo* info = nullptr);

/// Refits every consequent by least squares with premises held fixed.
TskModel fit_consequents(TskModel model, const Matrix& inputs, std::span<const double> targets,
                         FitInfo* info = nullptr);

/// Grid-partition seeding: `mfs_per_input` evenly spaced Gaussians per input,
/// one rule per combination, consequents by least squares.
TskModel grid_partition_model(const Matrix& inputs, std::span<const double> targets, std::size_t mfs_per_input,
                              std::vector<std::string> input_names = {}, FitInfo* info = nullptr);

/// Gradient of 0.5 * sum_i (y_hat_i - y_i)^2 with respect to premise centers
/// and sigmas, rule-major then input-major. Consequents are held fixed.
struct PremiseGradient {
  std::vector<double> centers;
  std::vector<double> sigmas;
};
PremiseGradient premise_gradient(const TskModel& model, const Matrix& inputs, std::span<const double> targets);

double training_rmse(const TskModel& model, const Matrix& inputs, std::span<const double> targets);

struct TrainOptions {
  std::size_t epochs = 100;
  double step = 0.01;
};

struct TrainReport {
  TskModel model;
  /// Entry 0 is the incoming model; entry e is after epoch e's consequent refit.
  std::vector<double> rmse_history;
  std::size_t best_epoch = 0;
  std::size_t sigma_clamps = 0;
  bool rank_deficient = false;
};

/// Hybrid training: each epoch refits consequents by least squares, records
/// the training RMSE, then takes a normalized gradient step on the premises.
/// The step halves whenever the RMSE rises. Returns the best recorded model.
TrainReport train_tsk(const TskModel& model, const Matrix& inputs, std::span<const double> targets,
                      const TrainOptions& options);

/// Structured text: per rule one (center, sigma) pair per input and the
/// consequent coefficients followed by the bias, at round-trip precision.
std::string export_model(const TskModel& model);
TskModel import_model(std::string_view text);

}  // namespace granular::nfis
