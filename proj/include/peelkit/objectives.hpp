#pragma once

#include "peelkit/fusion.hpp"
#include "peelkit/peeled_map.hpp"

#include <string>
#include <vector>

namespace peelkit {

// All map losses are L1 distances normalized per pixel (and per channel for
// RGB), one value per layer. The scalar form of each loss is the sum of its
// per-layer values.

struct LossWeights {
  double lambda_rd = 1.0;
  double lambda_rgb = 0.1;
  double lambda_sm = 0.001;

  /// Throws Error(InvalidArgument) on a negative or non-finite weight.
  void validate() const;
};

struct LayerLosses {
  std::vector<double> peel;
  std::vector<double> rd;
  std::vector<double> sm;
  std::vector<double> rgb;
};

struct LossReport {
  double l_peel = 0.0;
  double l_rd = 0.0;
  double l_sm = 0.0;
  double l_rgb = 0.0;
  double total = 0.0;
  LayerLosses per_layer;
};

struct LossInputs {
  const PeeledMapStack& pred_peel;
  const PeeledMapStack& gt_peel;
  const ResidualDeformationStack& pred_rd;
  const ResidualDeformationStack& gt_rd;
  const PeeledMapStack& smpl;
};

/// Mean |pred - gt| per depth layer. Error(DimensionMismatch) on shape mismatch.
std::vector<double> loss_peel(const PeeledMapStack& pred, const PeeledMapStack& gt);

/// Mean |pred delta - gt delta| per layer, invalid cells counting as 0.
std::vector<double> loss_rd(const ResidualDeformationStack& pred_rd, const ResidualDeformationStack& gt_rd);

/// Per layer, mean over pixels of |d/dx (gt - pred)| + |d/dy (gt - pred)|
/// where each side is offset + prior depth and derivatives are central
/// differences with replicated borders.
std::vector<double> loss_smooth(
    const ResidualDeformationStack& pred_rd,
    const ResidualDeformationStack& gt_rd,
    const PeeledMapStack& smpl);

/// Mean |pred - gt| over the three channels of layers 2 and up; layer 1 is
/// the input image and reports 0. Error(MissingRgb) if either lacks RGB.
std::vector<double> loss_rgb(const PeeledMapStack& pred, const PeeledMapStack& gt);

/// Weighted sum of the four losses: peel + rd * L_rd + rgb * L_rgb + sm * L_sm.
LossReport total_loss(const LossInputs& inputs, const LossWeights& weights = {});

/// {"l_peel", "l_rd", "l_sm", "l_rgb", "total", "per_layer": {...}}.
std::string format_loss_json(const LossReport& report);

} // namespace peelkit
