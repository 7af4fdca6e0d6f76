#pragma once

#include "peelkit/peeled_map.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace peelkit {

// Residual offsets are clamped to +/- this many meters by default.
inline constexpr double kDefaultRdLimit = 0.15;

/// Per-pixel, per-layer signed depth offsets with an explicit validity grid.
/// Offsets are kept in double precision so prior + offset reproduces the
/// target depth exactly.
class ResidualDeformationStack {
 public:
  ResidualDeformationStack(PinholeCamera camera, std::size_t layers);

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
  std::size_t index(std::size_t layer, std::uint32_t row, std::uint32_t column) const noexcept {
    return (layer * height() + row) * static_cast<std::size_t>(width()) + column;
  }

  double delta(std::size_t layer, std::uint32_t row, std::uint32_t column) const {
    return delta_[index(layer, row, column)];
  }
  bool valid(std::size_t layer, std::uint32_t row, std::uint32_t column) const {
    return valid_[index(layer, row, column)] != 0;
  }
  /// Invalid entries always store a zero offset.
  void set(std::size_t layer, std::uint32_t row, std::uint32_t column, double delta, bool valid);

  std::span<const double> delta_data() const noexcept {
    return delta_;
  }
  std::span<const std::uint8_t> validity_data() const noexcept {
    return valid_;
  }

  std::size_t valid_count() const noexcept;

  bool same_shape(const PeeledMapStack& stack) const noexcept;
  bool same_shape(const ResidualDeformationStack& other) const noexcept;

  /// Throws Error(InvalidArgument) if an offset is non-finite, exceeds
  /// `rd_limit` where valid, or is nonzero where invalid.
  void validate(double rd_limit = kDefaultRdLimit) const;

  bool operator==(const ResidualDeformationStack&) const = default;

 private:
  PinholeCamera camera_;
  std::size_t layers_;
  std::vector<double> delta_;
  std::vector<std::uint8_t> valid_;
};

/// layers x height x width selection grid: 1 where fusion takes prior + offset.
struct FusionMask {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::size_t layers = 0;
  std::vector<std::uint8_t> mask;

  bool at(std::size_t layer, std::uint32_t row, std::uint32_t column) const {
    return mask[(layer * height + row) * static_cast<std::size_t>(width) + column] != 0;
  }
};

/// Offsets from the prior to the clothed surface, clamped to
/// [-rd_limit, rd_limit], defined where both stacks have a surface.
/// Throws Error(DimensionMismatch) for differing shapes or cameras and
/// Error(InvalidArgument) for a non-positive limit (infinity is allowed).
ResidualDeformationStack compute_rd_gt(
    const PeeledMapStack& smpl,
    const PeeledMapStack& clothed,
    double rd_limit = kDefaultRdLimit);

/// Selection mask: offset valid and predicted peel depth > 0.
FusionMask fusion_mask(const ResidualDeformationStack& rd, const PeeledMapStack& peel);

/// Layer-wise blend mask * (prior + offset) + (1 - mask) * peel, before any
/// reordering. The result may violate the stack's layer ordering.
PeeledMapStack fuse_layers_unsorted(
    const PeeledMapStack& smpl,
    const ResidualDeformationStack& rd,
    const PeeledMapStack& peel,
    std::size_t threads = 0);

/// Per pixel, sorts surface depths ascending and pushes background to the
/// end in their original order. RGB follows its depth.
void sort_layers(PeeledMapStack& stack);

/// fuse_layers_unsorted followed by sort_layers.
PeeledMapStack fuse_maps(
    const PeeledMapStack& smpl,
    const ResidualDeformationStack& rd,
    const PeeledMapStack& peel,
    std::size_t threads = 0);

} // namespace peelkit
