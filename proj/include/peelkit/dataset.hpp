#pragma once

#include "peelkit/fusion.hpp"
#include "peelkit/mesh.hpp"
#include "peelkit/peeled_map.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace peelkit {

struct SubtractionConfig {
  std::size_t rays_per_face = 4;
  double max_interior_distance = 0.25;
  double epsilon = 1e-6;

  /// Throws Error(InvalidArgument).
  void validate() const;
};

/// Launch points for one garment face: the centroid, then points pulled
/// from the centroid toward each vertex by 0.25 (then 0.5, 0.75 for more
/// rays), cycling over the vertices.
std::vector<Vec3> interior_launch_points(const Vec3& a, const Vec3& b, const Vec3& c, std::size_t count);

/// Flags (1) every body face crossed by an inward ray from the garment. Rays
/// run along the negated garment face normal, after flipping all garment
/// normals if most of them face the garment centroid. Throws Error(EmptyMesh).
std::vector<std::uint8_t> occluded_body_faces(
    const TriangleMesh& body,
    const TriangleMesh& garment,
    const SubtractionConfig& config = {},
    std::size_t threads = 0);

/// Garment followed by the body faces that survive occluded_body_faces.
TriangleMesh subtract_body(
    const TriangleMesh& body,
    const TriangleMesh& garment,
    const SubtractionConfig& config = {},
    std::size_t threads = 0);

struct GroundTruthView {
  double yaw_degrees;
  TriangleMesh clothed_mesh;
  TriangleMesh smpl_mesh;
  PeeledMapStack clothed;
  PeeledMapStack smpl;
  ResidualDeformationStack rd;
};

struct GroundTruthOptions {
  std::size_t layers = kDefaultLayers;
  double rd_limit = kDefaultRdLimit;
  std::size_t threads = 0;
};

/// One view for the unrotated pose followed by one per listed yaw angle
/// (repeats and 0 are skipped). Both meshes turn together about the clothed
/// mesh centroid before encoding.
std::vector<GroundTruthView> make_ground_truth(
    const TriangleMesh& clothed,
    const TriangleMesh& smpl,
    const PinholeCamera& camera,
    std::span<const double> yaw_angles,
    const GroundTruthOptions& options = {});

/// "yaw0", "yaw45", "yaw-45", "yaw22.5".
std::string view_suffix(double yaw_degrees);

/// Writes per-view meshes (OBJ) and stacks (PEEL) into `out_dir`, then
/// manifest.json listing {clothed_mesh, smpl_mesh, view_angle, clothed_peel,
/// smpl_peel, rd_peel} per view with paths relative to `out_dir`. Returns the
/// manifest path. Throws Error(Io).
std::filesystem::path write_ground_truth(
    std::span<const GroundTruthView> views,
    const std::filesystem::path& out_dir);

} // namespace peelkit
