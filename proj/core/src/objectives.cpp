#include "multifid/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace multifid {

SyntheticCurveParams SyntheticCurveParams::standard(std::size_t dimension, std::uint64_t variant) {
  if (dimension == 0) throw std::invalid_argument("synthetic objective needs at least one dimension");
  SyntheticCurveParams p;
  Rng base(0x5eedc0deULL);
  std::uniform_real_distribution<double> inner(0.15, 0.85);
  p.primary_centre.resize(dimension);
  p.secondary_centre.resize(dimension);
  for (std::size_t j = 0; j < dimension; ++j) p.primary_centre[j] = inner(base);
  for (std::size_t j = 0; j < dimension; ++j) p.secondary_centre[j] = inner(base);
  if (variant != 0) {
    Rng shift(splitmix64(0xda7a5e7ULL + variant));
    std::normal_distribution<double> jitter(0.0, 0.08);
    for (auto& c : p.primary_centre) c = std::clamp(c + jitter(shift), 0.05, 0.95);
    for (auto& c : p.secondary_centre) c = inner(shift);
  }
  p.gamma_dim = dimension / 2;
  p.salt = variant;
  return p;
}

SyntheticCurveObjective::SyntheticCurveObjective(std::shared_ptr<const ConfigurationSpace> space,
                                                 SyntheticCurveParams params, std::string name)
    : space_(std::move(space)), params_(std::move(params)), name_(std::move(name)) {
  const auto d = space_->dimension();
  for (const auto& hp : space_->hyperparameters())
    if (!hp.is_numeric()) throw std::invalid_argument("synthetic objective supports numeric spaces only");
  if (params_.primary_centre.size() != d || params_.secondary_centre.size() != d)
    throw std::invalid_argument("synthetic well centres do not match space dimension");
  if (params_.gamma_dim >= d) throw std::invalid_argument("gamma_dim out of range");
}

double SyntheticCurveObjective::asymptote_unit(const std::vector<double>& u) const {
  auto well = [&](const std::vector<double>& c, double w) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) r2 += (u[j] - c[j]) * (u[j] - c[j]);
    return std::exp(-r2 / (2.0 * w * w));
  };
  const double g1 = well(params_.primary_centre, params_.primary_width);
  const double g2 = well(params_.secondary_centre, params_.secondary_width);
  return params_.optimum + (params_.plateau - params_.optimum) * (1.0 - g1) -
         params_.secondary_depth * g2 * (1.0 - g1);
}

double SyntheticCurveObjective::asymptote(const Configuration& config) const {
  return asymptote_unit(space_->to_unit_cube(config));
}

double SyntheticCurveObjective::decay_rate(const Configuration& config) const {
  const auto u = space_->to_unit_cube(config);
  return params_.gamma_lo + (params_.gamma_hi - params_.gamma_lo) * u[params_.gamma_dim];
}

double SyntheticCurveObjective::expected_loss(const Configuration& config, double budget) const {
  const auto u = space_->to_unit_cube(config);
  const double f_inf = asymptote_unit(u);
  const double gamma = params_.gamma_lo + (params_.gamma_hi - params_.gamma_lo) * u[params_.gamma_dim];
  return f_inf + (params_.f0 - f_inf) * std::pow(budget, -gamma);
}

double SyntheticCurveObjective::noise_at(const std::string& key, int epoch, std::uint64_t seed,
                                         std::uint64_t stream) const {
  if (params_.noise <= 0.0) return 0.0;
  std::uint64_t h = fnv1a64(key);
  h = hash_combine(h, static_cast<std::uint64_t>(epoch));
  h = hash_combine(h, seed);
  h = hash_combine(h, params_.salt);
  h = hash_combine(h, stream);
  Rng rng(h);
  std::normal_distribution<double> n(0.0, params_.noise);
  return n(rng);
}

double SyntheticCurveObjective::loss_at_epoch(const Configuration& config, int epoch, std::uint64_t seed) const {
  return std::clamp(expected_loss(config, epoch) + noise_at(config.key(), epoch, seed, 0), 0.0, 1.0);
}

std::vector<double> SyntheticCurveObjective::curve(const Configuration& config, int epochs, std::uint64_t seed) const {
  const auto u = space_->to_unit_cube(config);
  const double f_inf = asymptote_unit(u);
  const double gamma = params_.gamma_lo + (params_.gamma_hi - params_.gamma_lo) * u[params_.gamma_dim];
  const auto key = config.key();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(epochs, 0)));
  for (int e = 1; e <= epochs; ++e) {
    const double mean = f_inf + (params_.f0 - f_inf) * std::pow(static_cast<double>(e), -gamma);
    out.push_back(std::clamp(mean + noise_at(key, e, seed, 0), 0.0, 1.0));
  }
  return out;
}

std::vector<double> SyntheticCurveObjective::adaptive_curve(const Configuration& config, int budget, int horizon,
                                                            std::uint64_t seed) const {
  const auto u = space_->to_unit_cube(config);
  const double f_inf = asymptote_unit(u);
  const double gamma = params_.gamma_lo + (params_.gamma_hi - params_.gamma_lo) * u[params_.gamma_dim];
  const double speedup = std::sqrt(static_cast<double>(horizon) / static_cast<double>(budget));
  const auto key = config.key();
  std::vector<double> out;
  for (int e = 1; e <= budget; ++e) {
    const double mean = f_inf + (params_.f0 - f_inf) * std::pow(e * speedup, -gamma);
    out.push_back(std::clamp(mean + noise_at(key, e, seed, 1000 + static_cast<std::uint64_t>(budget)), 0.0, 1.0));
  }
  return out;
}

JobResult SyntheticCurveObjective::evaluate(const Job& job) const {
  const int epochs = std::max(1, static_cast<int>(std::lround(job.budget)));
  JobResult r;
  r.job_id = job.job_id;
  r.learning_curve = curve(job.configuration, epochs, job.seed);
  r.loss = r.learning_curve->back();
  r.wall_time = epochs * params_.epoch_seconds;
  r.status = JobStatus::ok;
  if (params_.n_validation_instances > 0) {
    const auto labels = synthesize_labels(params_.n_validation_instances, params_.n_classes, params_.salt);
    const std::uint64_t model_seed =
        hash_combine(hash_combine(fnv1a64(job.configuration.key()), static_cast<std::uint64_t>(epochs)), job.seed);
    r.predictions = synthesize_predictions(1.0 - r.loss, labels, params_.n_classes, model_seed);
  }
  return r;
}

std::optional<std::vector<int>> SyntheticCurveObjective::validation_labels() const {
  if (params_.n_validation_instances == 0) return std::nullopt;
  return synthesize_labels(params_.n_validation_instances, params_.n_classes, params_.salt);
}

JobResult SleepObjective::evaluate(const Job& job) const {
  const auto start = std::chrono::steady_clock::now();
  std::this_thread::sleep_for(duration_);
  JobResult r;
  r.job_id = job.job_id;
  const std::uint64_t h = hash_combine(fnv1a64(job.configuration.key()), static_cast<std::uint64_t>(job.budget * 1000));
  r.loss = static_cast<double>(h % 1000) / 1000.0;
  r.status = JobStatus::ok;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<int> synthesize_labels(std::size_t n_instances, std::size_t n_classes, std::uint64_t seed) {
  if (n_classes < 2) throw std::invalid_argument("need at least two classes");
  Rng rng(splitmix64(seed ^ 0x1abe15ULL));
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n_classes) - 1);
  std::vector<int> labels(n_instances);
  for (auto& l : labels) l = pick(rng);
  return labels;
}

Matrix synthesize_predictions(double accuracy, const std::vector<int>& labels, std::size_t n_classes,
                              std::uint64_t model_seed, double temperature) {
  if (n_classes < 2) throw std::invalid_argument("need at least two classes");
  const std::size_t n = labels.size();
  const auto n_correct =
      static_cast<std::size_t>(std::clamp(std::llround(std::clamp(accuracy, 0.0, 1.0) * static_cast<double>(n)),
                                          0LL, static_cast<long long>(n)));
  Rng rng(splitmix64(model_seed));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> correct(n, false);
  for (std::size_t i = 0; i < n_correct; ++i) correct[order[i]] = true;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> other(1, static_cast<int>(n_classes) - 1);
  Matrix m(n, n_classes);
  std::vector<double> logits(n_classes);
  for (std::size_t r = 0; r < n; ++r) {
    const int label = labels[r];
    const int predicted = correct[r] ? label : (label + other(rng)) % static_cast<int>(n_classes);
    double top = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      logits[c] = unit(rng);
      top = std::max(top, logits[c]);
    }
    logits[static_cast<std::size_t>(predicted)] = top + 0.25 + unit(rng);
    double z = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      logits[c] = std::exp(logits[c] / temperature);
      z += logits[c];
    }
    for (std::size_t c = 0; c < n_classes; ++c) m(r, c) = logits[c] / z;
  }
  return m;
}

}  // namespace multifid
