#include "peelkit/objectives.hpp"
#include "peelkit/error.hpp"
#include "peelkit/parallel.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>

namespace peelkit {

namespace {

void require_shape(bool same, const char* what) {
  if (!same) {
    throw Error(ErrorKind::DimensionMismatch, fmt::format("{}: inputs differ in shape", what));
  }
}

double layer_sum(const std::vector<double>& per_layer) {
  return pairwise_sum(per_layer);
}

// Central difference along one axis with clamped neighbor indices.
double central_difference(const std::vector<double>& image, std::uint32_t w, std::uint32_t h, std::uint32_t x, std::uint32_t y, bool along_x) {
  if (along_x) {
    const std::uint32_t left = x == 0 ? 0 : x - 1;
    const std::uint32_t right = x + 1 == w ? x : x + 1;
    return 0.5 * (image[static_cast<std::size_t>(y) * w + right] - image[static_cast<std::size_t>(y) * w + left]);
  }
  const std::uint32_t up = y == 0 ? 0 : y - 1;
  const std::uint32_t down = y + 1 == h ? y : y + 1;
  return 0.5 * (image[static_cast<std::size_t>(down) * w + x] - image[static_cast<std::size_t>(up) * w + x]);
}

} // namespace

void LossWeights::validate() const {
  for (double w : {lambda_rd, lambda_rgb, lambda_sm}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("loss weights must be finite and >= 0 (got {})", w));
    }
  }
}

std::vector<double> loss_peel(const PeeledMapStack& pred, const PeeledMapStack& gt) {
  require_shape(pred.same_shape(gt), "loss_peel");
  std::vector<double> result(pred.layers());
  std::vector<double> terms(pred.pixels());
  for (std::size_t layer = 0; layer < pred.layers(); ++layer) {
    const auto a = pred.depth_layer(layer);
    const auto b = gt.depth_layer(layer);
    for (std::size_t i = 0; i < terms.size(); ++i) {
      terms[i] = std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    }
    result[layer] = pairwise_sum(terms) / static_cast<double>(terms.size());
  }
  return result;
}

std::vector<double> loss_rd(const ResidualDeformationStack& pred_rd, const ResidualDeformationStack& gt_rd) {
  require_shape(pred_rd.same_shape(gt_rd), "loss_rd");
  const std::size_t pixels = pred_rd.pixels();
  std::vector<double> result(pred_rd.layers());
  std::vector<double> terms(pixels);
  const auto a = pred_rd.delta_data();
  const auto b = gt_rd.delta_data();
  for (std::size_t layer = 0; layer < pred_rd.layers(); ++layer) {
    for (std::size_t i = 0; i < pixels; ++i) {
      terms[i] = std::abs(a[layer * pixels + i] - b[layer * pixels + i]);
    }
    result[layer] = pairwise_sum(terms) / static_cast<double>(pixels);
  }
  return result;
}

std::vector<double> loss_smooth(
    const ResidualDeformationStack& pred_rd,
    const ResidualDeformationStack& gt_rd,
    const PeeledMapStack& smpl) {
  require_shape(pred_rd.same_shape(gt_rd) && pred_rd.same_shape(smpl), "loss_smooth");
  const std::uint32_t w = smpl.width();
  const std::uint32_t h = smpl.height();
  const std::size_t pixels = smpl.pixels();
  std::vector<double> result(smpl.layers());
  std::vector<double> pred_surface(pixels);
  std::vector<double> gt_surface(pixels);
  std::vector<double> terms(pixels);
  for (std::size_t layer = 0; layer < smpl.layers(); ++layer) {
    const auto prior = smpl.depth_layer(layer);
    for (std::size_t i = 0; i < pixels; ++i) {
      pred_surface[i] = pred_rd.delta_data()[layer * pixels + i] + prior[i];
      gt_surface[i] = gt_rd.delta_data()[layer * pixels + i] + prior[i];
    }
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        const double dx = central_difference(gt_surface, w, h, x, y, true) -
            central_difference(pred_surface, w, h, x, y, true);
        const double dy = central_difference(gt_surface, w, h, x, y, false) -
            central_difference(pred_surface, w, h, x, y, false);
        terms[static_cast<std::size_t>(y) * w + x] = std::abs(dx) + std::abs(dy);
      }
    }
    result[layer] = pairwise_sum(terms) / static_cast<double>(pixels);
  }
  return result;
}

std::vector<double> loss_rgb(const PeeledMapStack& pred, const PeeledMapStack& gt) {
  if (!pred.has_rgb() || !gt.has_rgb()) {
    throw Error(ErrorKind::MissingRgb, "loss_rgb needs RGB layers on both stacks");
  }
  require_shape(pred.same_shape(gt), "loss_rgb");
  const std::size_t values = 3 * pred.pixels();
  std::vector<double> result(pred.layers(), 0.0);
  std::vector<double> terms(values);
  const auto a = pred.rgb_data();
  const auto b = gt.rgb_data();
  for (std::size_t layer = 1; layer < pred.layers(); ++layer) {
    for (std::size_t i = 0; i < values; ++i) {
      terms[i] = std::abs(static_cast<double>(a[layer * values + i]) - static_cast<double>(b[layer * values + i]));
    }
    result[layer] = pairwise_sum(terms) / static_cast<double>(values);
  }
  return result;
}

LossReport total_loss(const LossInputs& inputs, const LossWeights& weights) {
  weights.validate();
  LossReport report;
  report.per_layer.peel = loss_peel(inputs.pred_peel, inputs.gt_peel);
  report.per_layer.rd = loss_rd(inputs.pred_rd, inputs.gt_rd);
  report.per_layer.sm = loss_smooth(inputs.pred_rd, inputs.gt_rd, inputs.smpl);
  report.per_layer.rgb = loss_rgb(inputs.pred_peel, inputs.gt_peel);
  report.l_peel = layer_sum(report.per_layer.peel);
  report.l_rd = layer_sum(report.per_layer.rd);
  report.l_sm = layer_sum(report.per_layer.sm);
  report.l_rgb = layer_sum(report.per_layer.rgb);
  report.total = report.l_peel + weights.lambda_rd * report.l_rd + weights.lambda_rgb * report.l_rgb +
      weights.lambda_sm * report.l_sm;
  return report;
}

std::string format_loss_json(const LossReport& report) {
  nlohmann::ordered_json j;
  j["l_peel"] = report.l_peel;
  j["l_rd"] = report.l_rd;
  j["l_sm"] = report.l_sm;
  j["l_rgb"] = report.l_rgb;
  j["total"] = report.total;
  j["per_layer"] = {
      {"peel", report.per_layer.peel},
      {"rd", report.per_layer.rd},
      {"sm", report.per_layer.sm},
      {"rgb", report.per_layer.rgb},
  };
  return j.dump(2) + "\n";
}

} // namespace peelkit
