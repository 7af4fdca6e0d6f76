#include "peelkit/fusion.hpp"
#include "peelkit/error.hpp"
#include "peelkit/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <utility>

namespace peelkit {

namespace {

void require_same_frame(const PinholeCamera& a, const PinholeCamera& b, const char* what) {
  if (!a.matches(b)) {
    throw Error(ErrorKind::DimensionMismatch, fmt::format("{}: cameras differ", what));
  }
}

void require_same_shape(const PeeledMapStack& a, const PeeledMapStack& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(
        ErrorKind::DimensionMismatch,
        fmt::format(
            "{}: {}x{}x{} vs {}x{}x{}",
            what,
            a.width(),
            a.height(),
            a.layers(),
            b.width(),
            b.height(),
            b.layers()));
  }
  require_same_frame(a.camera(), b.camera(), what);
}

void require_same_shape(const PeeledMapStack& a, const ResidualDeformationStack& rd, const char* what) {
  if (!rd.same_shape(a)) {
    throw Error(
        ErrorKind::DimensionMismatch,
        fmt::format(
            "{}: {}x{}x{} vs residual {}x{}x{}",
            what,
            a.width(),
            a.height(),
            a.layers(),
            rd.width(),
            rd.height(),
            rd.layers()));
  }
  require_same_frame(a.camera(), rd.camera(), what);
}

} // namespace

ResidualDeformationStack::ResidualDeformationStack(PinholeCamera camera, std::size_t layers)
    : camera_(std::move(camera)), layers_(layers) {
  if (layers == 0 || layers > 0xFFFF) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("layer count {} outside [1, 65535]", layers));
  }
  delta_.assign(layers_ * pixels(), 0.0);
  valid_.assign(layers_ * pixels(), 0);
}

void ResidualDeformationStack::set(
    std::size_t layer,
    std::uint32_t row,
    std::uint32_t column,
    double delta,
    bool valid) {
  const std::size_t i = index(layer, row, column);
  delta_[i] = valid ? delta : 0.0;
  valid_[i] = valid ? 1 : 0;
}

std::size_t ResidualDeformationStack::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

bool ResidualDeformationStack::same_shape(const PeeledMapStack& stack) const noexcept {
  return width() == stack.width() && height() == stack.height() && layers_ == stack.layers();
}

bool ResidualDeformationStack::same_shape(const ResidualDeformationStack& other) const noexcept {
  return width() == other.width() && height() == other.height() && layers_ == other.layers_;
}

void ResidualDeformationStack::validate(double rd_limit) const {
  for (std::size_t i = 0; i < delta_.size(); ++i) {
    const double d = delta_[i];
    if (!std::isfinite(d) || (valid_[i] && std::abs(d) > rd_limit) || (!valid_[i] && d != 0.0)) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("residual offset {} at cell {} breaks the stack invariants", d, i));
    }
  }
}

ResidualDeformationStack compute_rd_gt(const PeeledMapStack& smpl, const PeeledMapStack& clothed, double rd_limit) {
  require_same_shape(smpl, clothed, "compute_rd_gt");
  if (!(rd_limit > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("rd_limit must be positive, got {}", rd_limit));
  }
  ResidualDeformationStack rd(smpl.camera(), smpl.layers());
  for (std::size_t layer = 0; layer < smpl.layers(); ++layer) {
    for (std::uint32_t row = 0; row < smpl.height(); ++row) {
      for (std::uint32_t column = 0; column < smpl.width(); ++column) {
        const double prior = smpl.depth(layer, row, column);
        const double target = clothed.depth(layer, row, column);
        if (prior > 0.0 && target > 0.0) {
          // Exact in double for float inputs.
          rd.set(layer, row, column, std::clamp(target - prior, -rd_limit, rd_limit), true);
        }
      }
    }
  }
  return rd;
}

FusionMask fusion_mask(const ResidualDeformationStack& rd, const PeeledMapStack& peel) {
  require_same_shape(peel, rd, "fusion_mask");
  FusionMask mask{peel.width(), peel.height(), peel.layers(), std::vector<std::uint8_t>(peel.layers() * peel.pixels())};
  const auto depths = peel.depth_data();
  const auto valid = rd.validity_data();
  for (std::size_t i = 0; i < mask.mask.size(); ++i) {
    mask.mask[i] = (valid[i] != 0 && depths[i] > 0.0f) ? 1 : 0;
  }
  return mask;
}

PeeledMapStack fuse_layers_unsorted(
    const PeeledMapStack& smpl,
    const ResidualDeformationStack& rd,
    const PeeledMapStack& peel,
    std::size_t threads) {
  require_same_shape(smpl, peel, "fuse_maps");
  require_same_shape(smpl, rd, "fuse_maps");
  const FusionMask mask = fusion_mask(rd, peel);
  PeeledMapStack fused(peel.camera(), peel.layers(), peel.has_rgb());
  if (peel.has_rgb()) {
    std::copy(peel.rgb_data().begin(), peel.rgb_data().end(), fused.rgb_data().begin());
  }
  const auto prior = smpl.depth_data();
  const auto predicted = peel.depth_data();
  const auto offsets = rd.delta_data();
  auto out = fused.depth_data();
  parallel_for(out.size(), threads, 1 << 14, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (mask.mask[i]) {
        const double deformed = static_cast<double>(prior[i]) + offsets[i];
        out[i] = deformed > kNearPlane ? static_cast<float>(deformed) : 0.0f;
      } else {
        out[i] = predicted[i];
      }
    }
  });
  return fused;
}

void sort_layers(PeeledMapStack& stack) {
  const std::size_t layers = stack.layers();
  const bool rgb = stack.has_rgb();
  struct Sample {
    float depth;
    std::array<float, 3> color;
  };
  std::vector<Sample> samples;
  samples.reserve(layers);
  for (std::uint32_t row = 0; row < stack.height(); ++row) {
    for (std::uint32_t column = 0; column < stack.width(); ++column) {
      samples.clear();
      for (std::size_t layer = 0; layer < layers; ++layer) {
        const float d = stack.depth(layer, row, column);
        samples.push_back({d > kNearPlane ? d : 0.0f, rgb ? stack.rgb(layer, row, column) : std::array<float, 3>{}});
      }
      // Background keeps its relative order and color behind the surfaces.
      std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
        return std::pair(a.depth == 0.0f, a.depth) < std::pair(b.depth == 0.0f, b.depth);
      });
      for (std::size_t layer = 0; layer < layers; ++layer) {
        stack.set_depth(layer, row, column, samples[layer].depth);
        if (rgb) {
          stack.set_rgb(layer, row, column, samples[layer].color);
        }
      }
    }
  }
}

PeeledMapStack fuse_maps(
    const PeeledMapStack& smpl,
    const ResidualDeformationStack& rd,
    const PeeledMapStack& peel,
    std::size_t threads) {
  PeeledMapStack fused = fuse_layers_unsorted(smpl, rd, peel, threads);
  sort_layers(fused);
  return fused;
}

} // namespace peelkit
