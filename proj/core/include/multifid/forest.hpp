#pragma once

#include <span>
#include <vector>

#include "multifid/common.hpp"

namespace multifid {

struct ForestSettings {
  std::size_t n_trees = 32;
  std::size_t max_depth = 32;
  std::size_t min_leaf = 3;
  bool bootstrap = true;
};

/// Axis-aligned cell of the unit cube with the tree's constant prediction on it.
struct LeafBox {
  std::vector<double> lower;
  std::vector<double> upper;
  double value = 0.0;

  double volume() const;
};

/// CART regression tree on [0,1]^d with variance-reduction splits.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  void fit(const std::vector<std::vector<double>>& X, std::span<const double> y, std::vector<std::size_t> rows,
           const ForestSettings& settings);
  double predict(std::span<const double> x) const;
  /// Leaf partition of the unit cube; volumes sum to 1.
  std::vector<LeafBox> leaves() const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t dimension() const { return dims_; }

 private:
  int build(const std::vector<std::vector<double>>& X, std::span<const double> y, std::vector<std::size_t>& rows,
            std::size_t begin, std::size_t end, std::size_t depth, const ForestSettings& settings);

  std::vector<Node> nodes_;
  std::size_t dims_ = 0;
};

class ForestSurrogate {
 public:
  double predict(std::span<const double> x) const;
  const std::vector<RegressionTree>& trees() const { return trees_; }
  std::size_t dimension() const { return dims_; }
  /// NaN when no sample was ever out of bag.
  double oob_rmse() const { return oob_rmse_; }

 private:
  friend ForestSurrogate fit_forest(const std::vector<std::vector<double>>&, const std::vector<double>&, Rng&,
                                    const ForestSettings&);
  std::vector<RegressionTree> trees_;
  std::size_t dims_ = 0;
  double oob_rmse_ = 0.0;
};

/// Inputs must lie in [0,1]^d. Throws std::invalid_argument for fewer than 20 rows,
/// ragged rows or non-finite targets.
ForestSurrogate fit_forest(const std::vector<std::vector<double>>& X, const std::vector<double>& y, Rng& rng,
                           const ForestSettings& settings = {});

}  // namespace multifid
