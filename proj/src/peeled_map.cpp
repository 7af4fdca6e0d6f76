#include "peelkit/peeled_map.hpp"
#include "peelkit/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace peelkit {

PeeledMapStack::PeeledMapStack(PinholeCamera camera, std::size_t layers, bool with_rgb)
    : camera_(std::move(camera)), layers_(layers) {
  if (layers == 0 || layers > 0xFFFF) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("layer count {} outside [1, 65535]", layers));
  }
  depth_.assign(layers_ * pixels(), 0.0f);
  if (with_rgb) {
    rgb_.assign(3 * layers_ * pixels(), 0.0f);
  }
}

std::array<float, 3> PeeledMapStack::rgb(std::size_t layer, std::uint32_t row, std::uint32_t column) const {
  const std::size_t base = 3 * index(layer, row, column);
  return {rgb_[base], rgb_[base + 1], rgb_[base + 2]};
}

void PeeledMapStack::set_rgb(
    std::size_t layer,
    std::uint32_t row,
    std::uint32_t column,
    const std::array<float, 3>& value) {
  const std::size_t base = 3 * index(layer, row, column);
  std::copy(value.begin(), value.end(), rgb_.begin() + static_cast<std::ptrdiff_t>(base));
}

std::size_t PeeledMapStack::nonzero_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(depth_.begin(), depth_.end(), [](float d) { return d != 0.0f; }));
}

bool PeeledMapStack::same_shape(const PeeledMapStack& other) const noexcept {
  return width() == other.width() && height() == other.height() && layers_ == other.layers_;
}

void PeeledMapStack::validate() const {
  for (float value : rgb_) {
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::InvalidArgument, "RGB grid contains a non-finite value");
    }
  }
  for (std::uint32_t row = 0; row < height(); ++row) {
    for (std::uint32_t column = 0; column < width(); ++column) {
      float previous = 0.0f;
      bool background_seen = false;
      for (std::size_t layer = 0; layer < layers_; ++layer) {
        const float d = depth(layer, row, column);
        if (!std::isfinite(d) || d < 0.0f) {
          throw Error(
              ErrorKind::InvalidArgument,
              fmt::format("invalid depth {} at layer {} pixel ({}, {})", d, layer, column, row));
        }
        if (d == 0.0f) {
          background_seen = true;
          continue;
        }
        if (background_seen) {
          throw Error(
              ErrorKind::InvalidArgument,
              fmt::format("depth after background at layer {} pixel ({}, {})", layer, column, row));
        }
        if (d <= kNearPlane || d < previous) {
          throw Error(
              ErrorKind::InvalidArgument,
              fmt::format("non-monotonic or near-plane depth at layer {} pixel ({}, {})", layer, column, row));
        }
        previous = d;
      }
    }
  }
}

} // namespace peelkit
