#include "peelkit/mesh.hpp"
#include "peelkit/error.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace peelkit {

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces, std::vector<Vec3> colors)
    : vertices_(std::move(vertices)), faces_(std::move(faces)), colors_(std::move(colors)) {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!vertices_[i].allFinite()) {
      throw Error(ErrorKind::InvalidMesh, fmt::format("vertex {} has a non-finite coordinate", i));
    }
  }
  if (!colors_.empty() && colors_.size() != vertices_.size()) {
    throw Error(
        ErrorKind::InvalidMesh,
        fmt::format("{} colors for {} vertices", colors_.size(), vertices_.size()));
  }
  for (std::size_t i = 0; i < colors_.size(); ++i) {
    if (!colors_[i].allFinite()) {
      throw Error(ErrorKind::InvalidMesh, fmt::format("color {} is not finite", i));
    }
  }
  face_valid_.resize(faces_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    for (std::uint32_t index : faces_[f]) {
      if (index >= vertices_.size()) {
        throw Error(
            ErrorKind::InvalidMesh,
            fmt::format("face {} references vertex {} of {}", f, index, vertices_.size()));
      }
    }
    const bool valid = face_area(f) >= kDegenerateFaceArea;
    face_valid_[f] = valid ? 1 : 0;
    valid_faces_ += valid ? 1 : 0;
  }
}

std::array<Vec3, 3> TriangleMesh::triangle(std::size_t face) const {
  const Face& idx = faces_[face];
  return {vertices_[idx[0]], vertices_[idx[1]], vertices_[idx[2]]};
}

Vec3 TriangleMesh::face_centroid(std::size_t face) const {
  const auto [a, b, c] = triangle(face);
  return (a + b + c) / 3.0;
}

Vec3 TriangleMesh::face_normal(std::size_t face) const {
  const auto [a, b, c] = triangle(face);
  return (b - a).cross(c - a);
}

double TriangleMesh::face_area(std::size_t face) const {
  return 0.5 * face_normal(face).norm();
}

Vec3 TriangleMesh::centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& v : vertices_) {
    sum += v;
  }
  return vertices_.empty() ? sum : Vec3(sum / static_cast<double>(vertices_.size()));
}

TriangleMesh TriangleMesh::with_vertices(std::vector<Vec3> vertices) const {
  return TriangleMesh(std::move(vertices), faces_, colors_);
}

TriangleMesh rotate_yaw(const TriangleMesh& mesh, double degrees, const Vec3& pivot) {
  if (degrees == 0.0) {
    return mesh;
  }
  const double radians = degrees * std::numbers::pi / 180.0;
  const Eigen::Matrix3d rotation = Eigen::AngleAxisd(radians, Vec3::UnitY()).toRotationMatrix();
  std::vector<Vec3> moved;
  moved.reserve(mesh.vertex_count());
  for (const Vec3& v : mesh.vertices()) {
    moved.push_back(pivot + rotation * (v - pivot));
  }
  return mesh.with_vertices(std::move(moved));
}

TriangleMesh rotate_yaw(const TriangleMesh& mesh, double degrees) {
  return rotate_yaw(mesh, degrees, mesh.centroid());
}

TriangleMesh filter_faces(const TriangleMesh& mesh, std::span<const std::uint8_t> keep) {
  if (keep.size() != mesh.face_count()) {
    throw Error(ErrorKind::InvalidArgument, "face mask size differs from face count");
  }
  constexpr std::uint32_t kUnused = ~std::uint32_t{0};
  std::vector<std::uint32_t> remap(mesh.vertex_count(), kUnused);
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    if (keep[f]) {
      for (std::uint32_t v : mesh.faces()[f]) {
        remap[v] = 0;
      }
    }
  }
  std::vector<Vec3> vertices;
  std::vector<Vec3> colors;
  for (std::size_t v = 0; v < remap.size(); ++v) {
    if (remap[v] != kUnused) {
      remap[v] = static_cast<std::uint32_t>(vertices.size());
      vertices.push_back(mesh.vertices()[v]);
      if (mesh.has_colors()) {
        colors.push_back(mesh.colors()[v]);
      }
    }
  }
  std::vector<Face> faces;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    if (keep[f]) {
      const Face& face = mesh.faces()[f];
      faces.push_back({remap[face[0]], remap[face[1]], remap[face[2]]});
    }
  }
  return TriangleMesh(std::move(vertices), std::move(faces), std::move(colors));
}

TriangleMesh merge_meshes(const TriangleMesh& first, const TriangleMesh& second) {
  std::vector<Vec3> vertices = first.vertices();
  vertices.insert(vertices.end(), second.vertices().begin(), second.vertices().end());
  std::vector<Face> faces = first.faces();
  const auto offset = static_cast<std::uint32_t>(first.vertex_count());
  for (const Face& f : second.faces()) {
    faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
  }
  std::vector<Vec3> colors;
  if (first.has_colors() || second.has_colors()) {
    const Vec3 gray = Vec3::Constant(0.5);
    colors = first.has_colors() ? first.colors() : std::vector<Vec3>(first.vertex_count(), gray);
    if (second.has_colors()) {
      colors.insert(colors.end(), second.colors().begin(), second.colors().end());
    } else {
      colors.resize(vertices.size(), gray);
    }
  }
  return TriangleMesh(std::move(vertices), std::move(faces), std::move(colors));
}

} // namespace peelkit
