#pragma once

#include "peelkit/camera.hpp"
#include "peelkit/mesh.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace peelkit {

// Hits at t <= kRayEpsilon are treated as the launch surface and dropped.
inline constexpr double kRayEpsilon = 1e-6;
// Hits closer than this along a ray (shared edges and vertices) are merged.
inline constexpr double kHitMergeTolerance = 1e-9;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Aabb {
  Vec3 lo = Vec3::Constant(kInfinity);
  Vec3 hi = Vec3::Constant(-kInfinity);

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& box) {
    lo = lo.cwiseMin(box.lo);
    hi = hi.cwiseMax(box.hi);
  }
  bool empty() const {
    return (lo.array() > hi.array()).any();
  }
  bool contains(const Aabb& box) const {
    return (lo.array() <= box.lo.array()).all() && (hi.array() >= box.hi.array()).all();
  }
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.squaredNorm();
  }
};

/// One ray-surface crossing. `u` and `v` weight the face's second and third
/// vertex. `z_depth` is the z coordinate of the hit in the ray's frame, which
/// is the camera-space depth for rays produced by PinholeCamera::pixel_ray.
struct Hit {
  double t;
  std::uint32_t face;
  double u;
  double v;
  double z_depth;
};

/// Hits in strictly increasing t.
using HitList = std::vector<Hit>;

struct TriangleHit {
  double t;
  double u;
  double v;
};

/// Moller-Trumbore without backface culling. Returns hits with
/// t_min < t <= t_max only.
std::optional<TriangleHit> intersect_triangle(
    const Ray& ray,
    const Vec3& a,
    const Vec3& b,
    const Vec3& c,
    double t_min = kRayEpsilon,
    double t_max = kInfinity);

/// Sorts by (t, face), merges hits within kHitMergeTolerance of the first hit
/// of their group keeping the smallest face id, and truncates to max_hits.
HitList merge_hits(std::vector<Hit> raw, std::size_t max_hits);

/// Binary BVH over the valid faces of a mesh, built by median split on the
/// longest centroid axis. Nodes are stored depth-first: an internal node's
/// left child immediately follows it.
class Bvh {
 public:
  static constexpr std::size_t kMaxLeafSize = 4;

  struct Node {
    Aabb box;
    // Leaves: range [first, first + count) of face_order(). Internal nodes
    // have count == 0 and keep their right child index in `first`.
    std::uint32_t first = 0;
    std::uint32_t count = 0;

    bool is_leaf() const {
      return count > 0;
    }
  };

  /// Throws Error(EmptyMesh) if the mesh has no valid faces.
  explicit Bvh(const TriangleMesh& mesh);

  const std::vector<Node>& nodes() const noexcept {
    return nodes_;
  }
  const std::vector<std::uint32_t>& face_order() const noexcept {
    return face_order_;
  }
  /// Padded bounding box of one face.
  const Aabb& face_box(std::uint32_t face) const {
    return face_boxes_[face];
  }
  std::size_t mesh_face_count() const noexcept {
    return face_boxes_.size();
  }

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end, const std::vector<Vec3>& centroids);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> face_order_;
  std::vector<Aabb> face_boxes_;
};

/// Up to max_hits nearest crossings of `ray` with the mesh, in increasing t.
HitList intersect_all(
    const Bvh& bvh,
    const TriangleMesh& mesh,
    const Ray& ray,
    std::size_t max_hits,
    double t_min = kRayEpsilon,
    double t_max = kInfinity);

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct ClosestFace {
  std::uint32_t face;
  double squared_distance;
  Vec3 point;
};

/// Nearest valid face to `p`; ties go to the smaller face id.
ClosestFace closest_face(const Bvh& bvh, const TriangleMesh& mesh, const Vec3& p);

} // namespace peelkit
