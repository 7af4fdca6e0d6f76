#include "peelkit/dataset.hpp"
#include "peelkit/bvh.hpp"
#include "peelkit/codec.hpp"
#include "peelkit/error.hpp"
#include "peelkit/io_util.hpp"
#include "peelkit/mesh_io.hpp"
#include "peelkit/parallel.hpp"
#include "peelkit/peel_io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace peelkit {

void SubtractionConfig::validate() const {
  if (rays_per_face < 1) {
    throw Error(ErrorKind::InvalidArgument, "rays_per_face must be at least 1");
  }
  if (!(max_interior_distance > 0.0) || !std::isfinite(max_interior_distance)) {
    throw Error(ErrorKind::InvalidArgument, "max_interior_distance must be positive and finite");
  }
  if (!(epsilon >= 0.0) || epsilon >= max_interior_distance) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in [0, max_interior_distance)");
  }
}

std::vector<Vec3> interior_launch_points(const Vec3& a, const Vec3& b, const Vec3& c, std::size_t count) {
  const Vec3 centroid = (a + b + c) / 3.0;
  const std::array<Vec3, 3> corners = {a, b, c};
  std::vector<Vec3> points;
  points.reserve(count);
  if (count > 0) {
    points.push_back(centroid);
  }
  for (std::size_t k = 1; k < count; ++k) {
    const std::size_t ring = (k - 1) / 3;
    const double pull = 0.25 * static_cast<double>(1 + ring % 3);
    points.push_back(centroid + pull * (corners[(k - 1) % 3] - centroid));
  }
  return points;
}

std::vector<std::uint8_t> occluded_body_faces(
    const TriangleMesh& body,
    const TriangleMesh& garment,
    const SubtractionConfig& config,
    std::size_t threads) {
  config.validate();
  if (body.empty() || garment.empty()) {
    throw Error(ErrorKind::EmptyMesh, "body subtraction needs non-empty body and garment meshes");
  }
  const Bvh bvh(body);

  // Majority vote on orientation against the garment centroid.
  const Vec3 center = garment.centroid();
  std::ptrdiff_t vote = 0;
  for (std::size_t f = 0; f < garment.face_count(); ++f) {
    if (garment.face_valid(f)) {
      const double side = garment.face_normal(f).dot(garment.face_centroid(f) - center);
      vote += side > 0.0 ? 1 : (side < 0.0 ? -1 : 0);
    }
  }
  const double inward = vote >= 0 ? -1.0 : 1.0;

  std::vector<std::vector<std::uint32_t>> hit_faces(garment.face_count());
  parallel_for(garment.face_count(), threads, 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      if (!garment.face_valid(f)) {
        continue;
      }
      const auto [a, b, c] = garment.triangle(f);
      const Vec3 direction = inward * garment.face_normal(f).normalized();
      for (const Vec3& origin : interior_launch_points(a, b, c, config.rays_per_face)) {
        const Ray ray{origin, direction};
        for (const Hit& hit : intersect_all(
                 bvh, body, ray, std::numeric_limits<std::size_t>::max(), config.epsilon, config.max_interior_distance)) {
          hit_faces[f].push_back(hit.face);
        }
      }
    }
  });

  std::vector<std::uint8_t> removed(body.face_count(), 0);
  for (const auto& faces : hit_faces) {
    for (std::uint32_t face : faces) {
      removed[face] = 1;
    }
  }
  return removed;
}

TriangleMesh subtract_body(
    const TriangleMesh& body,
    const TriangleMesh& garment,
    const SubtractionConfig& config,
    std::size_t threads) {
  std::vector<std::uint8_t> keep = occluded_body_faces(body, garment, config, threads);
  for (auto& flag : keep) {
    flag = flag ? 0 : 1;
  }
  return merge_meshes(garment, filter_faces(body, keep));
}

std::vector<GroundTruthView> make_ground_truth(
    const TriangleMesh& clothed,
    const TriangleMesh& smpl,
    const PinholeCamera& camera,
    std::span<const double> yaw_angles,
    const GroundTruthOptions& options) {
  std::vector<double> angles = {0.0};
  for (double yaw : yaw_angles) {
    if (!std::isfinite(yaw)) {
      throw Error(ErrorKind::InvalidArgument, "yaw angles must be finite");
    }
    if (std::find(angles.begin(), angles.end(), yaw) == angles.end()) {
      angles.push_back(yaw);
    }
  }
  const Vec3 pivot = clothed.centroid();
  std::vector<GroundTruthView> views;
  views.reserve(angles.size());
  for (double yaw : angles) {
    TriangleMesh clothed_view = rotate_yaw(clothed, yaw, pivot);
    TriangleMesh smpl_view = rotate_yaw(smpl, yaw, pivot);
    PeeledMapStack clothed_stack = encode_peeled(clothed_view, camera, options.layers, options.threads);
    PeeledMapStack smpl_stack = encode_peeled(smpl_view, camera, options.layers, options.threads);
    ResidualDeformationStack rd = compute_rd_gt(smpl_stack, clothed_stack, options.rd_limit);
    views.push_back(
        {yaw,
         std::move(clothed_view),
         std::move(smpl_view),
         std::move(clothed_stack),
         std::move(smpl_stack),
         std::move(rd)});
  }
  return views;
}

std::string view_suffix(double yaw_degrees) {
  return fmt::format("yaw{}", yaw_degrees == 0.0 ? 0.0 : yaw_degrees);
}

std::filesystem::path write_ground_truth(std::span<const GroundTruthView> views, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorKind::Io, fmt::format("cannot create output directory '{}'", out_dir.string()));
  }
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (const GroundTruthView& view : views) {
    const std::string suffix = view_suffix(view.yaw_degrees);
    const std::string clothed_mesh = fmt::format("clothed_{}.obj", suffix);
    const std::string smpl_mesh = fmt::format("smpl_{}.obj", suffix);
    const std::string clothed_peel = fmt::format("clothed_{}.peel", suffix);
    const std::string smpl_peel = fmt::format("smpl_{}.peel", suffix);
    const std::string rd_peel = fmt::format("rd_{}.peel", suffix);
    write_mesh(out_dir / clothed_mesh, view.clothed_mesh);
    write_mesh(out_dir / smpl_mesh, view.smpl_mesh);
    write_peel(out_dir / clothed_peel, view.clothed);
    write_peel(out_dir / smpl_peel, view.smpl);
    write_rd(out_dir / rd_peel, view.rd);
    nlohmann::ordered_json sample;
    sample["clothed_mesh"] = clothed_mesh;
    sample["smpl_mesh"] = smpl_mesh;
    sample["view_angle"] = view.yaw_degrees;
    sample["clothed_peel"] = clothed_peel;
    sample["smpl_peel"] = smpl_peel;
    sample["rd_peel"] = rd_peel;
    samples.push_back(sample);
  }
  nlohmann::ordered_json manifest;
  manifest["samples"] = samples;
  const std::filesystem::path manifest_path = out_dir / "manifest.json";
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

} // namespace peelkit
