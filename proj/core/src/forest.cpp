#include "multifid/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace multifid {

double LeafBox::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < lower.size(); ++j) v *= upper[j] - lower[j];
  return v;
}

void RegressionTree::fit(const std::vector<std::vector<double>>& X, std::span<const double> y,
                         std::vector<std::size_t> rows, const ForestSettings& settings) {
  nodes_.clear();
  dims_ = X.empty() ? 0 : X.front().size();
  if (rows.empty()) throw std::invalid_argument("cannot fit a tree on zero rows");
  build(X, y, rows, 0, rows.size(), 0, settings);
}

int RegressionTree::build(const std::vector<std::vector<double>>& X, std::span<const double> y,
                          std::vector<std::size_t>& rows, std::size_t begin, std::size_t end, std::size_t depth,
                          const ForestSettings& settings) {
  const std::size_t n = end - begin;
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    sum += y[rows[i]];
    sq += y[rows[i]] * y[rows[i]];
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({-1, 0.0, -1, -1, sum / static_cast<double>(n)});
  const double sse = sq - sum * sum / static_cast<double>(n);
  if (depth >= settings.max_depth || n < 2 * settings.min_leaf || sse <= 1e-12 * std::max(1.0, sq)) return id;

  int best_feature = -1;
  double best_threshold = 0.0, best_gain = 0.0;
  std::vector<std::pair<double, double>> col(n);
  for (std::size_t j = 0; j < dims_; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = {X[rows[begin + i]][j], y[rows[begin + i]]};
    std::sort(col.begin(), col.end());
    if (col.front().first == col.back().first) continue;
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += col[i].second;
      const std::size_t nl = i + 1, nr = n - nl;
      if (col[i].first == col[i + 1].first) continue;
      if (nl < settings.min_leaf || nr < settings.min_leaf) continue;
      const double right_sum = sum - left_sum;
      // SSE reduction = sum_l^2/n_l + sum_r^2/n_r - sum^2/n
      const double gain = left_sum * left_sum / static_cast<double>(nl) +
                          right_sum * right_sum / static_cast<double>(nr) - sum * sum / static_cast<double>(n);
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = static_cast<int>(j);
        best_threshold = 0.5 * (col[i].first + col[i + 1].first);
      }
    }
  }
  if (best_feature < 0 || best_gain <= 1e-12 * sse) return id;

  const auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                  rows.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t r) {
                                    return X[r][static_cast<std::size_t>(best_feature)] < best_threshold;
                                  });
  const auto split = static_cast<std::size_t>(mid - rows.begin());
  const int left = build(X, y, rows, begin, split, depth + 1, settings);
  const int right = build(X, y, rows, split, end, depth + 1, settings);
  nodes_[static_cast<std::size_t>(id)].feature = best_feature;
  nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0)
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes_[i].feature)] < nodes_[i].threshold ? nodes_[i].left
                                                                                                       : nodes_[i].right);
  return nodes_[i].value;
}

std::vector<LeafBox> RegressionTree::leaves() const {
  std::vector<LeafBox> out;
  struct Frame {
    int node;
    std::vector<double> lo, hi;
  };
  std::vector<Frame> stack{{0, std::vector<double>(dims_, 0.0), std::vector<double>(dims_, 1.0)}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const Node& node = nodes_[static_cast<std::size_t>(f.node)];
    if (node.feature < 0) {
      out.push_back({std::move(f.lo), std::move(f.hi), node.value});
      continue;
    }
    const auto j = static_cast<std::size_t>(node.feature);
    const double t = std::clamp(node.threshold, f.lo[j], f.hi[j]);
    Frame right{node.right, f.lo, f.hi};
    right.lo[j] = t;
    f.hi[j] = t;
    f.node = node.left;
    stack.push_back(std::move(right));
    stack.push_back(std::move(f));
  }
  return out;
}

double ForestSurrogate::predict(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& t : trees_) s += t.predict(x);
  return s / static_cast<double>(trees_.size());
}

ForestSurrogate fit_forest(const std::vector<std::vector<double>>& X, const std::vector<double>& y, Rng& rng,
                           const ForestSettings& settings) {
  if (X.size() != y.size()) throw std::invalid_argument("X and y differ in length");
  if (X.size() < 20) throw std::invalid_argument("forest needs at least 20 observations");
  if (settings.n_trees == 0) throw std::invalid_argument("forest needs at least one tree");
  const std::size_t d = X.front().size();
  for (const auto& row : X)
    if (row.size() != d) throw std::invalid_argument("ragged feature rows");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite target");

  const std::size_t n = X.size();
  ForestSurrogate f;
  f.dims_ = d;
  std::vector<double> oob_sum(n, 0.0);
  std::vector<std::size_t> oob_count(n, 0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t t = 0; t < settings.n_trees; ++t) {
    std::vector<std::size_t> rows(n);
    std::vector<bool> in_bag(n, !settings.bootstrap);
    if (settings.bootstrap) {
      for (auto& r : rows) {
        r = pick(rng);
        in_bag[r] = true;
      }
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    RegressionTree tree;
    tree.fit(X, y, std::move(rows), settings);
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[i]) continue;
      oob_sum[i] += tree.predict(X[i]);
      ++oob_count[i];
    }
    f.trees_.push_back(std::move(tree));
  }
  double se = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!oob_count[i]) continue;
    const double e = oob_sum[i] / static_cast<double>(oob_count[i]) - y[i];
    se += e * e;
    ++m;
  }
  f.oob_rmse_ = m ? std::sqrt(se / static_cast<double>(m)) : std::numeric_limits<double>::quiet_NaN();
  return f;
}

}  // namespace multifid
