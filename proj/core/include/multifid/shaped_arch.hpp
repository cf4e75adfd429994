#pragma once

#include <cstdint>
#include <vector>

namespace multifid {

/// Inputs of a funnel-shaped MLP: the first hidden layer is `n_max` wide and the
/// widths shrink linearly towards `n_out` over `n_layers` layers.
struct FunnelShape {
  std::int64_t n_max = 0;
  std::int64_t n_layers = 0;
  std::int64_t n_out = 0;
};

/// Layer widths of a funnel MLP. Widths follow an arithmetic progression in exact
/// rational arithmetic and are rounded half-up; the first width is n_max and, for two
/// or more layers, the last is n_out. A single layer yields {n_max}.
/// Throws std::invalid_argument for non-positive inputs or n_max < n_out (n_layers >= 2).
std::vector<std::int64_t> funnel_widths(const FunnelShape& shape);

struct ResNetWidths {
  std::vector<std::int64_t> groups;  // one output width per group
  std::vector<std::int64_t> blocks;  // group width repeated blocks_per_group times
};

/// Per-group widths of a shaped ResNet; each group is sized like a funnel layer.
ResNetWidths resnet_group_widths(std::int64_t n_max, std::int64_t n_groups, std::int64_t blocks_per_group,
                                 std::int64_t n_out);

}  // namespace multifid
