#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "multifid/common.hpp"
#include "multifid/configspace.hpp"

namespace multifid {

struct KdeSettings {
  double split_quantile = 0.15;
  double random_fraction = 1.0 / 3.0;
  int n_samples = 64;
  double bandwidth_factor = 3.0;
  double min_bandwidth = 1e-3;
};

struct Observation {
  std::vector<double> point;  // unit-cube encoding
  double loss = 0.0;
};

class KdeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Product-kernel density with equal weights. Continuous and integer dimensions use a
/// Gaussian truncated to [0, 1]; categorical dimensions use an Aitchison-Aitken kernel
/// whose bandwidth is the probability of leaving the centre's level.
class Kde {
 public:
  Kde(std::vector<std::vector<double>> points, std::vector<DimensionInfo> dims, double min_bandwidth);

  const std::vector<std::vector<double>>& points() const { return points_; }
  const std::vector<double>& bandwidths() const { return bandwidths_; }
  const std::vector<DimensionInfo>& dims() const { return dims_; }

  double log_density(std::span<const double> x) const;
  /// Draw from the mixture with every bandwidth scaled by `bandwidth_factor`.
  std::vector<double> sample(Rng& rng, double bandwidth_factor) const;

 private:
  double log_kernel(std::size_t dim, double x, double centre, double bw) const;

  std::vector<std::vector<double>> points_;
  std::vector<DimensionInfo> dims_;
  std::vector<double> bandwidths_;
};

enum class KdeSide { good, bad };

struct KdeModel {
  double budget = 0.0;
  Kde good;
  Kde bad;
};

/// Split observations by loss into good/bad sets and fit one KDE on each. The good set
/// holds max(ceil(q*n), d+1) points; the bad set holds the rest, topped up with the
/// next-best points to at least d+1. Requires n >= d+2 and finite losses.
KdeModel fit_tpe(std::span<const Observation> observations, std::span<const DimensionInfo> dims, double budget,
                 const KdeSettings& settings = {});

double log_density(const KdeModel& model, KdeSide side, std::span<const double> point);

/// Sample `n_samples` candidates from the widened good density and keep the one with
/// the highest good/bad log-density ratio.
std::vector<double> propose(const KdeModel& model, int n_samples, double bandwidth_factor, Rng& rng);

}  // namespace multifid
