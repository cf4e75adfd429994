#include "multifid/shaped_arch.hpp"

#include <stdexcept>
#include <string>

namespace multifid {

std::vector<std::int64_t> funnel_widths(const FunnelShape& shape) {
  if (shape.n_max <= 0 || shape.n_layers <= 0 || shape.n_out <= 0)
    throw std::invalid_argument("funnel shape values must be strictly positive");
  if (shape.n_layers == 1) return {shape.n_max};
  if (shape.n_max < shape.n_out)
    throw std::invalid_argument("n_max (" + std::to_string(shape.n_max) + ") is smaller than n_out (" +
                                std::to_string(shape.n_out) + ")");

  // width_i = n_max - i * (n_max - n_out) / (L - 1) = num_i / den
  const std::int64_t den = shape.n_layers - 1;
  const std::int64_t drop = shape.n_max - shape.n_out;
  std::vector<std::int64_t> widths;
  widths.reserve(static_cast<std::size_t>(shape.n_layers));
  for (std::int64_t i = 0; i < shape.n_layers; ++i) {
    const std::int64_t num = shape.n_max * den - i * drop;
    widths.push_back((2 * num + den) / (2 * den));  // half-up, num >= 0
  }
  widths.front() = shape.n_max;
  widths.back() = shape.n_out;
  return widths;
}

ResNetWidths resnet_group_widths(std::int64_t n_max, std::int64_t n_groups, std::int64_t blocks_per_group,
                                 std::int64_t n_out) {
  if (blocks_per_group <= 0) throw std::invalid_argument("blocks_per_group must be strictly positive");
  ResNetWidths out;
  out.groups = funnel_widths({n_max, n_groups, n_out});
  for (auto w : out.groups) out.blocks.insert(out.blocks.end(), static_cast<std::size_t>(blocks_per_group), w);
  return out;
}

}  // namespace multifid
