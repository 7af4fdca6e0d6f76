#pragma once

#include "peelkit/mesh.hpp"

#include <cstdint>
#include <vector>

namespace peelkit {

/// World-space points with optional RGB in [0, 1] and the peeled layer each
/// point came from (0-based). `colors` and `layer_ids` are either empty or
/// sized like `points`.
struct ColoredPointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> colors;
  std::vector<std::uint16_t> layer_ids;

  std::size_t size() const noexcept {
    return points.size();
  }
  bool empty() const noexcept {
    return points.empty();
  }
  bool has_colors() const noexcept {
    return !colors.empty();
  }
};

} // namespace peelkit
