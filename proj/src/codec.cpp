#include "peelkit/codec.hpp"
#include "peelkit/bvh.hpp"
#include "peelkit/error.hpp"
#include "peelkit/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace peelkit {

PeeledMapStack encode_peeled(
    const TriangleMesh& mesh,
    const PinholeCamera& camera,
    std::size_t layers,
    std::size_t threads) {
  if (layers == 0) {
    throw Error(ErrorKind::InvalidArgument, "layers must be at least 1");
  }
  if (mesh.empty()) {
    throw Error(ErrorKind::EmptyMesh, "cannot encode a mesh without valid faces");
  }
  const TriangleMesh local = to_camera_space(mesh, camera.pose());
  const Bvh bvh(local);
  PeeledMapStack stack(camera, layers, mesh.has_colors());

  parallel_for(camera.height(), threads, 4, [&](std::size_t row_begin, std::size_t row_end) {
    for (auto row = static_cast<std::uint32_t>(row_begin); row < row_end; ++row) {
      for (std::uint32_t column = 0; column < camera.width(); ++column) {
        const Ray ray = camera.pixel_ray(column, row);
        // Start past the near plane so every returned hit is a valid depth.
        const double t_min = std::max(kRayEpsilon, kNearPlane / ray.direction.z());
        const HitList hits = intersect_all(bvh, local, ray, layers, t_min);
        for (std::size_t layer = 0; layer < hits.size(); ++layer) {
          const Hit& hit = hits[layer];
          const auto depth = static_cast<float>(hit.z_depth);
          if (!(depth > kNearPlane)) {
            break;
          }
          stack.set_depth(layer, row, column, depth);
          if (stack.has_rgb()) {
            const Face& face = local.faces()[hit.face];
            const Vec3 color = (1.0 - hit.u - hit.v) * local.colors()[face[0]] +
                hit.u * local.colors()[face[1]] + hit.v * local.colors()[face[2]];
            stack.set_rgb(
                layer,
                row,
                column,
                {static_cast<float>(color.x()), static_cast<float>(color.y()), static_cast<float>(color.z())});
          }
        }
      }
    }
  });
  return stack;
}

ColoredPointCloud decode_pointcloud(const PeeledMapStack& stack) {
  const PinholeCamera& camera = stack.camera();
  ColoredPointCloud cloud;
  const std::size_t count = stack.nonzero_count();
  cloud.points.reserve(count);
  cloud.layer_ids.reserve(count);
  if (stack.has_rgb()) {
    cloud.colors.reserve(count);
  }
  for (std::size_t layer = 0; layer < stack.layers(); ++layer) {
    for (std::uint32_t row = 0; row < stack.height(); ++row) {
      for (std::uint32_t column = 0; column < stack.width(); ++column) {
        const float depth = stack.depth(layer, row, column);
        if (depth == 0.0f) {
          continue;
        }
        cloud.points.push_back(camera.pose().apply_inverse(camera.back_project(column, row, depth)));
        cloud.layer_ids.push_back(static_cast<std::uint16_t>(layer));
        if (stack.has_rgb()) {
          const auto rgb = stack.rgb(layer, row, column);
          cloud.colors.emplace_back(rgb[0], rgb[1], rgb[2]);
        }
      }
    }
  }
  return cloud;
}

ColoredPointCloud subsample_uniform(const ColoredPointCloud& cloud, std::size_t target, std::uint64_t seed) {
  if (target == 0) {
    throw Error(ErrorKind::InvalidArgument, "subsample target must be at least 1");
  }
  if (cloud.size() <= target) {
    return cloud;
  }
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first `target` slots become the sample.
  for (std::size_t i = 0; i < target; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(target);
  std::sort(order.begin(), order.end());

  ColoredPointCloud sample;
  sample.points.reserve(target);
  for (std::size_t i : order) {
    sample.points.push_back(cloud.points[i]);
    if (cloud.has_colors()) {
      sample.colors.push_back(cloud.colors[i]);
    }
    if (!cloud.layer_ids.empty()) {
      sample.layer_ids.push_back(cloud.layer_ids[i]);
    }
  }
  return sample;
}

} // namespace peelkit
