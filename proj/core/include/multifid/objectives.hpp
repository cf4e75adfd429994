#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "multifid/configspace.hpp"
#include "multifid/executor.hpp"
#include "multifid/matrix.hpp"

namespace multifid {

/// Constants of the synthetic learning-curve objective
///
///   loss(c, b) = f_inf(c) + (f0 - f_inf(c)) * b^(-gamma(c)) + eps
///
/// where u is the unit-cube encoding of c,
///   f_inf(u)  = optimum + (plateau - optimum) * (1 - g1(u)) - secondary_depth * g2(u) * (1 - g1(u)),
///   g_k(u)    = exp(-|u - centre_k|^2 / (2 width_k^2)),
///   gamma(u)  = gamma_lo + (gamma_hi - gamma_lo) * u[gamma_dim],
/// and eps ~ N(0, noise^2) is seeded by (configuration, epoch, seed, salt). The primary
/// well is the global minimum with f_inf(primary_centre) = optimum exactly; the
/// secondary well is a local trap of depth about (plateau - optimum - secondary_depth).
struct SyntheticCurveParams {
  std::vector<double> primary_centre;
  std::vector<double> secondary_centre;
  double primary_width = 0.3;
  double secondary_width = 0.2;
  double plateau = 0.6;
  double optimum = 0.05;
  double secondary_depth = 0.25;
  std::size_t gamma_dim = 0;
  double gamma_lo = 0.3;
  double gamma_hi = 1.5;
  double f0 = 0.9;
  double noise = 0.01;
  std::uint64_t salt = 0;
  /// Seconds of simulated training time per epoch, reported as wall_time.
  double epoch_seconds = 1.0;
  /// When > 0, results carry synthesized validation predictions.
  std::size_t n_validation_instances = 0;
  std::size_t n_classes = 2;

  /// Published constants for a d-dimensional space; `variant` shifts both wells
  /// (variant 0 is the default benchmark).
  static SyntheticCurveParams standard(std::size_t dimension, std::uint64_t variant = 0);
};

class SyntheticCurveObjective : public Objective {
 public:
  SyntheticCurveObjective(std::shared_ptr<const ConfigurationSpace> space, SyntheticCurveParams params,
                          std::string name = "synthetic");

  JobResult evaluate(const Job& job) const override;
  std::string describe() const override { return "synthetic:" + name_; }
  std::optional<std::vector<int>> validation_labels() const override;

  double asymptote(const Configuration& config) const;  // f_inf
  double decay_rate(const Configuration& config) const;  // gamma
  /// Noise-free loss at a real-valued budget.
  double expected_loss(const Configuration& config, double budget) const;
  /// Loss at an integer epoch including noise.
  double loss_at_epoch(const Configuration& config, int epoch, std::uint64_t seed) const;
  /// Loss curve for epochs 1..epochs (index e-1 holds epoch e).
  std::vector<double> curve(const Configuration& config, int epochs, std::uint64_t seed) const;
  /// Curve of a learning-rate schedule annealed to `budget` instead of `horizon`: the
  /// schedule progresses faster, so epoch e behaves like epoch e * sqrt(horizon / budget).
  std::vector<double> adaptive_curve(const Configuration& config, int budget, int horizon, std::uint64_t seed) const;

  const SyntheticCurveParams& params() const { return params_; }
  const ConfigurationSpace& space() const { return *space_; }

 private:
  double asymptote_unit(const std::vector<double>& u) const;
  double noise_at(const std::string& key, int epoch, std::uint64_t seed, std::uint64_t stream) const;

  std::shared_ptr<const ConfigurationSpace> space_;
  SyntheticCurveParams params_;
  std::string name_;
};

/// Sleeps for a fixed duration and returns a deterministic pseudo-loss. Used to measure
/// parallel scaling independent of CPU contention.
class SleepObjective : public Objective {
 public:
  explicit SleepObjective(std::chrono::milliseconds duration) : duration_(duration) {}
  JobResult evaluate(const Job& job) const override;
  std::string describe() const override { return "sleep:" + std::to_string(duration_.count()) + "ms"; }

 private:
  std::chrono::milliseconds duration_;
};

/// Deterministic class labels for a validation split.
std::vector<int> synthesize_labels(std::size_t n_instances, std::size_t n_classes, std::uint64_t seed);

/// Class-probability rows whose argmax matches the label on exactly
/// round(accuracy * n) instances (chosen by `model_seed`). Each row is a softmax with
/// a peaked logit on the predicted class and seeded noise elsewhere.
Matrix synthesize_predictions(double accuracy, const std::vector<int>& labels, std::size_t n_classes,
                              std::uint64_t model_seed, double temperature = 1.0);

}  // namespace multifid
