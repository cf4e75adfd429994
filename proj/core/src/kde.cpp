#include "multifid/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace multifid {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_sum_exp(const std::vector<double>& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double max_categorical_bandwidth(std::size_t levels) {
  return static_cast<double>(levels - 1) / static_cast<double>(levels);
}

}  // namespace

Kde::Kde(std::vector<std::vector<double>> points, std::vector<DimensionInfo> dims, double min_bandwidth)
    : points_(std::move(points)), dims_(std::move(dims)) {
  if (points_.empty()) throw KdeError("KDE needs at least one point");
  const std::size_t d = dims_.size();
  for (const auto& p : points_)
    if (p.size() != d) throw KdeError("KDE points have inconsistent length");

  const double n = static_cast<double>(points_.size());
  const double scott = 1.06 * std::pow(n, -1.0 / (static_cast<double>(d) + 4.0));
  bandwidths_.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& p : points_) mean += p[j];
    mean /= n;
    double var = 0.0;
    for (const auto& p : points_) var += (p[j] - mean) * (p[j] - mean);
    const double sd = points_.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    double bw = scott * sd;
    if (dims_[j].kind == DimKind::categorical) {
      const auto levels = std::max<std::size_t>(dims_[j].levels, 2);
      bw /= static_cast<double>(levels - 1);  // index span -> unit span
      bw = std::clamp(bw, min_bandwidth, max_categorical_bandwidth(levels));
    } else {
      bw = std::max(bw, min_bandwidth);
    }
    bandwidths_[j] = bw;
  }
}

double Kde::log_kernel(std::size_t dim, double x, double centre, double bw) const {
  if (dims_[dim].kind == DimKind::categorical) {
    const auto levels = std::max<std::size_t>(dims_[dim].levels, 2);
    const double lambda = std::min(bw, max_categorical_bandwidth(levels));
    if (std::lround(x) == std::lround(centre)) return std::log1p(-lambda);
    return std::log(lambda / static_cast<double>(levels - 1));
  }
  const double z = (x - centre) / bw;
  const double mass = normal_cdf((1.0 - centre) / bw) - normal_cdf(-centre / bw);
  return -0.5 * z * z - std::log(bw * std::sqrt(2.0 * std::numbers::pi)) - std::log(mass);
}

double Kde::log_density(std::span<const double> x) const {
  if (x.size() != dims_.size())
    throw KdeError("query length " + std::to_string(x.size()) + " does not match dimension " +
                   std::to_string(dims_.size()));
  std::vector<double> terms;
  terms.reserve(points_.size());
  for (const auto& p : points_) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += log_kernel(j, x[j], p[j], bandwidths_[j]);
    terms.push_back(s);
  }
  return log_sum_exp(terms) - std::log(static_cast<double>(points_.size()));
}

std::vector<double> Kde::sample(Rng& rng, double bandwidth_factor) const {
  std::uniform_int_distribution<std::size_t> pick(0, points_.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& centre = points_[pick(rng)];
  std::vector<double> out(centre.size());
  for (std::size_t j = 0; j < centre.size(); ++j) {
    const double bw = bandwidths_[j] * bandwidth_factor;
    if (dims_[j].kind == DimKind::categorical) {
      const auto levels = std::max<std::size_t>(dims_[j].levels, 2);
      const double lambda = std::min(bw, max_categorical_bandwidth(levels));
      const auto c = static_cast<std::size_t>(std::lround(centre[j]));
      if (unit(rng) < lambda) {
        std::uniform_int_distribution<std::size_t> other(0, levels - 2);
        auto k = other(rng);
        if (k >= c) ++k;
        out[j] = static_cast<double>(k);
      } else {
        out[j] = static_cast<double>(c);
      }
      continue;
    }
    // Truncated normal by rejection; the acceptance probability is bounded below
    // because the centre lies inside [0, 1].
    std::normal_distribution<double> noise(centre[j], bw);
    double v = centre[j];
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double draw = noise(rng);
      if (draw >= 0.0 && draw <= 1.0) {
        v = draw;
        break;
      }
    }
    out[j] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

KdeModel fit_tpe(std::span<const Observation> observations, std::span<const DimensionInfo> dims, double budget,
                 const KdeSettings& settings) {
  const std::size_t d = dims.size();
  const std::size_t n = observations.size();
  if (n < d + 2)
    throw KdeError("too few observations: " + std::to_string(n) + " < d + 2 = " + std::to_string(d + 2));
  for (const auto& o : observations) {
    if (!std::isfinite(o.loss)) throw KdeError("non-finite loss in observations");
    if (o.point.size() != d) throw KdeError("observation length does not match dimension");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return observations[a].loss < observations[b].loss; });

  auto n_good = static_cast<std::size_t>(std::ceil(settings.split_quantile * static_cast<double>(n)));
  n_good = std::min(std::max(n_good, d + 1), n - 1);
  const std::size_t bad_begin = std::min(n_good, n - (d + 1));

  std::vector<std::vector<double>> good, bad;
  for (std::size_t i = 0; i < n_good; ++i) good.push_back(observations[order[i]].point);
  for (std::size_t i = bad_begin; i < n; ++i) bad.push_back(observations[order[i]].point);

  std::vector<DimensionInfo> dim_vec(dims.begin(), dims.end());
  return KdeModel{budget, Kde(std::move(good), dim_vec, settings.min_bandwidth),
                  Kde(std::move(bad), dim_vec, settings.min_bandwidth)};
}

double log_density(const KdeModel& model, KdeSide side, std::span<const double> point) {
  return side == KdeSide::good ? model.good.log_density(point) : model.bad.log_density(point);
}

std::vector<double> propose(const KdeModel& model, int n_samples, double bandwidth_factor, Rng& rng) {
  std::vector<double> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < std::max(n_samples, 1); ++i) {
    auto candidate = model.good.sample(rng, bandwidth_factor);
    if (n_samples <= 1) return candidate;
    const double score = model.good.log_density(candidate) - model.bad.log_density(candidate);
    if (best.empty() || score > best_score) {
      best_score = score;
      best = std::move(candidate);
    }
  }
  return best;
}

}  // namespace multifid
