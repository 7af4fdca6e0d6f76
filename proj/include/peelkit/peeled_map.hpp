#pragma once

#include "peelkit/camera.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace peelkit {

inline constexpr std::size_t kDefaultLayers = 4;
inline constexpr std::uint32_t kDefaultResolution = 512;
// Valid depths must exceed this; 0.0 marks background.
inline constexpr double kNearPlane = 1e-4;

/// layers x height x width grid of camera-space z-depths (0 = background),
/// with an optional RGB grid of the same shape. Indexing is
/// [layer][row][column], row-major, layer by layer.
class PeeledMapStack {
 public:
  PeeledMapStack(PinholeCamera camera, std::size_t layers, bool with_rgb);

  const PinholeCamera& camera() const noexcept {
    return camera_;
  }
  std::uint32_t width() const noexcept {
    return camera_.width();
  }
  std::uint32_t height() const noexcept {
    return camera_.height();
  }
  std::size_t layers() const noexcept {
    return layers_;
  }
  std::size_t pixels() const noexcept {
    return static_cast<std::size_t>(width()) * height();
  }
  bool has_rgb() const noexcept {
    return !rgb_.empty();
  }

  std::size_t index(std::size_t layer, std::uint32_t row, std::uint32_t column) const noexcept {
    return (layer * height() + row) * static_cast<std::size_t>(width()) + column;
  }

  float depth(std::size_t layer, std::uint32_t row, std::uint32_t column) const {
    return depth_[index(layer, row, column)];
  }
  void set_depth(std::size_t layer, std::uint32_t row, std::uint32_t column, float value) {
    depth_[index(layer, row, column)] = value;
  }

  std::array<float, 3> rgb(std::size_t layer, std::uint32_t row, std::uint32_t column) const;
  void set_rgb(std::size_t layer, std::uint32_t row, std::uint32_t column, const std::array<float, 3>& value);

  std::span<const float> depth_layer(std::size_t layer) const {
    return std::span<const float>(depth_).subspan(layer * pixels(), pixels());
  }

  std::span<const float> depth_data() const noexcept {
    return depth_;
  }
  std::span<float> depth_data() noexcept {
    return depth_;
  }
  // Interleaved r, g, b per pixel; empty without RGB.
  std::span<const float> rgb_data() const noexcept {
    return rgb_;
  }
  std::span<float> rgb_data() noexcept {
    return rgb_;
  }

  std::size_t nonzero_count() const noexcept;

  /// Same width, height and layer count.
  bool same_shape(const PeeledMapStack& other) const noexcept;

  /// Throws Error(InvalidArgument) if any value is non-finite or negative,
  /// a nonzero depth is at or below the near plane, depths decrease across
  /// layers, or a background layer precedes a nonzero one.
  void validate() const;

  bool operator==(const PeeledMapStack&) const = default;

 private:
  PinholeCamera camera_;
  std::size_t layers_;
  std::vector<float> depth_;
  std::vector<float> rgb_;
};

} // namespace peelkit
