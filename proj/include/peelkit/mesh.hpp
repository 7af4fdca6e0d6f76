#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace peelkit {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::uint32_t, 3>;

// Faces whose area falls below this are flagged invalid and never traced.
inline constexpr double kDegenerateFaceArea = 1e-12;

/// Indexed triangle surface in meters, optionally carrying per-vertex RGB in
/// [0, 1]. Construction validates indices and coordinates and flags
/// degenerate faces; the mesh is immutable afterwards.
class TriangleMesh {
 public:
  TriangleMesh() = default;

  /// Throws Error(InvalidMesh) on out-of-range indices, non-finite
  /// coordinates, or a color array whose size differs from the vertex count.
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces, std::vector<Vec3> colors = {});

  const std::vector<Vec3>& vertices() const noexcept {
    return vertices_;
  }
  const std::vector<Face>& faces() const noexcept {
    return faces_;
  }
  const std::vector<Vec3>& colors() const noexcept {
    return colors_;
  }
  bool has_colors() const noexcept {
    return !colors_.empty();
  }

  std::size_t vertex_count() const noexcept {
    return vertices_.size();
  }
  std::size_t face_count() const noexcept {
    return faces_.size();
  }
  bool face_valid(std::size_t face) const noexcept {
    return face_valid_[face] != 0;
  }
  std::size_t valid_face_count() const noexcept {
    return valid_faces_;
  }
  bool empty() const noexcept {
    return valid_faces_ == 0;
  }

  std::array<Vec3, 3> triangle(std::size_t face) const;
  Vec3 face_centroid(std::size_t face) const;
  // Unnormalized (b - a) x (c - a).
  Vec3 face_normal(std::size_t face) const;
  double face_area(std::size_t face) const;

  /// Mean of all vertex positions.
  Vec3 centroid() const;

  /// Same topology and colors, new positions.
  TriangleMesh with_vertices(std::vector<Vec3> vertices) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> colors_;
  std::vector<std::uint8_t> face_valid_;
  std::size_t valid_faces_ = 0;
};

/// Rotates about the vertical (y) axis through `pivot`, right-handed:
/// +90 degrees takes +x to -z.
TriangleMesh rotate_yaw(const TriangleMesh& mesh, double degrees, const Vec3& pivot);

/// Rotates about the vertical axis through the mesh centroid.
TriangleMesh rotate_yaw(const TriangleMesh& mesh, double degrees);

/// Keeps only the faces with keep[f] != 0 and drops vertices no longer
/// referenced. Vertex order is preserved.
TriangleMesh filter_faces(const TriangleMesh& mesh, std::span<const std::uint8_t> keep);

/// Concatenates meshes. If only one input carries colors, the other's
/// vertices are filled with mid-gray.
TriangleMesh merge_meshes(const TriangleMesh& first, const TriangleMesh& second);

} // namespace peelkit
