#include "peelkit/primitives.hpp"
#include "peelkit/error.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

namespace peelkit {

TriangleMesh make_icosphere(int subdivisions, double radius, const Vec3& center) {
  if (subdivisions < 0 || radius <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "icosphere needs subdivisions >= 0 and radius > 0");
  }
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> vertices = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (Vec3& v : vertices) {
    v.normalize();
  }
  std::vector<Face> faces = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
  };
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end()) {
        return it->second;
      }
      const auto index = static_cast<std::uint32_t>(vertices.size());
      vertices.push_back((vertices[a] + vertices[b]).normalized());
      midpoints.emplace(key, index);
      return index;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const std::uint32_t ab = midpoint(f[0], f[1]);
      const std::uint32_t bc = midpoint(f[1], f[2]);
      const std::uint32_t ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  for (Vec3& v : vertices) {
    v = center + radius * v;
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh make_uv_sphere(int stacks, int slices, double radius, const Vec3& center, bool upper_only) {
  if (stacks < 2 || slices < 3 || radius <= 0.0 || (upper_only && stacks % 2 != 0)) {
    throw Error(ErrorKind::InvalidArgument, "uv sphere needs stacks >= 2 (even if open), slices >= 3");
  }
  const int rows = upper_only ? stacks / 2 : stacks;
  std::vector<Vec3> vertices;
  // Row 0 is the north pole; rows 1..rows are latitude rings.
  vertices.push_back(center + Vec3(0, radius, 0));
  for (int i = 1; i <= rows; ++i) {
    const double polar = std::numbers::pi * i / stacks;
    if (!upper_only && i == stacks) {
      break;
    }
    for (int j = 0; j < slices; ++j) {
      const double azimuth = 2.0 * std::numbers::pi * j / slices;
      vertices.push_back(
          center +
          radius * Vec3(std::sin(polar) * std::cos(azimuth), std::cos(polar), -std::sin(polar) * std::sin(azimuth)));
    }
  }
  const int rings = upper_only ? rows : stacks - 1;
  auto ring = [slices](int r, int j) { return static_cast<std::uint32_t>(1 + (r - 1) * slices + (j % slices)); };
  std::vector<Face> faces;
  for (int j = 0; j < slices; ++j) {
    faces.push_back({0, ring(1, j), ring(1, j + 1)});
  }
  for (int r = 1; r < rings; ++r) {
    for (int j = 0; j < slices; ++j) {
      faces.push_back({ring(r, j), ring(r + 1, j), ring(r + 1, j + 1)});
      faces.push_back({ring(r, j), ring(r + 1, j + 1), ring(r, j + 1)});
    }
  }
  if (!upper_only) {
    const auto south = static_cast<std::uint32_t>(vertices.size());
    vertices.push_back(center + Vec3(0, -radius, 0));
    for (int j = 0; j < slices; ++j) {
      faces.push_back({ring(rings, j), south, ring(rings, j + 1)});
    }
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh make_box(const Vec3& center, const Vec3& half_extents) {
  std::vector<Vec3> vertices;
  for (int i = 0; i < 8; ++i) {
    const Vec3 sign((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
    vertices.push_back(center + sign.cwiseProduct(half_extents));
  }
  std::vector<Face> faces = {
      {0, 4, 6}, {0, 6, 2}, // -x
      {1, 3, 7}, {1, 7, 5}, // +x
      {0, 1, 5}, {0, 5, 4}, // -y
      {2, 6, 7}, {2, 7, 3}, // +y
      {0, 2, 3}, {0, 3, 1}, // -z
      {4, 5, 7}, {4, 7, 6}, // +z
  };
  return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh make_quad(double depth, double half_size, const Vec3& center_xy) {
  const double x = center_xy.x();
  const double y = center_xy.y();
  std::vector<Vec3> vertices = {
      {x - half_size, y - half_size, depth},
      {x + half_size, y - half_size, depth},
      {x + half_size, y + half_size, depth},
      {x - half_size, y + half_size, depth},
  };
  std::vector<Face> faces = {{0, 2, 1}, {0, 3, 2}};
  return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh make_torus(double major_radius, double minor_radius, int rings, int sides, const Vec3& center) {
  if (rings < 3 || sides < 3 || minor_radius <= 0.0 || major_radius <= minor_radius) {
    throw Error(ErrorKind::InvalidArgument, "torus needs rings, sides >= 3 and R > r > 0");
  }
  std::vector<Vec3> vertices;
  for (int i = 0; i < rings; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / rings;
    for (int j = 0; j < sides; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / sides;
      const double rho = major_radius + minor_radius * std::cos(theta);
      vertices.push_back(center + Vec3(rho * std::cos(phi), minor_radius * std::sin(theta), -rho * std::sin(phi)));
    }
  }
  auto at = [rings, sides](int i, int j) {
    return static_cast<std::uint32_t>((i % rings) * sides + (j % sides));
  };
  std::vector<Face> faces;
  for (int i = 0; i < rings; ++i) {
    for (int j = 0; j < sides; ++j) {
      faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh with_position_colors(const TriangleMesh& mesh) {
  Vec3 lo = Vec3::Constant(kDegenerateFaceArea);
  Vec3 hi = -lo;
  if (mesh.vertex_count() > 0) {
    lo = hi = mesh.vertices().front();
  }
  for (const Vec3& v : mesh.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec3 extent = (hi - lo).cwiseMax(1e-12);
  std::vector<Vec3> colors;
  colors.reserve(mesh.vertex_count());
  for (const Vec3& v : mesh.vertices()) {
    colors.push_back((v - lo).cwiseQuotient(extent));
  }
  return TriangleMesh(mesh.vertices(), mesh.faces(), std::move(colors));
}

} // namespace peelkit
