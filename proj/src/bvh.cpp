#include "peelkit/bvh.hpp"
#include "peelkit/error.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace peelkit {

namespace {

// Face boxes are padded so that rounding in the slab test never culls a
// triangle the exact triangle test would accept.
constexpr double kBoxPadding = 1e-9;

bool ray_hits_box(
    const Aabb& box,
    const Vec3& origin,
    const Vec3& direction,
    const Vec3& inverse,
    double t_min,
    double t_max) {
  for (int axis = 0; axis < 3; ++axis) {
    if (direction[axis] == 0.0) {
      if (origin[axis] < box.lo[axis] || origin[axis] > box.hi[axis]) {
        return false;
      }
      continue;
    }
    double t0 = (box.lo[axis] - origin[axis]) * inverse[axis];
    double t1 = (box.hi[axis] - origin[axis]) * inverse[axis];
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
    if (t_min > t_max) {
      return false;
    }
  }
  return true;
}

} // namespace

std::optional<TriangleHit> intersect_triangle(
    const Ray& ray,
    const Vec3& a,
    const Vec3& b,
    const Vec3& c,
    double t_min,
    double t_max) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = ray.direction.cross(e2);
  const double det = e1.dot(p);
  if (det == 0.0) {
    return std::nullopt;
  }
  const double inv_det = 1.0 / det;
  const Vec3 s = ray.origin - a;
  const double u = s.dot(p) * inv_det;
  if (u < 0.0 || u > 1.0) {
    return std::nullopt;
  }
  const Vec3 q = s.cross(e1);
  const double v = ray.direction.dot(q) * inv_det;
  if (v < 0.0 || u + v > 1.0) {
    return std::nullopt;
  }
  const double t = e2.dot(q) * inv_det;
  if (!(t > t_min) || t > t_max) {
    return std::nullopt;
  }
  return TriangleHit{t, u, v};
}

HitList merge_hits(std::vector<Hit> raw, std::size_t max_hits) {
  std::sort(raw.begin(), raw.end(), [](const Hit& x, const Hit& y) {
    return x.t < y.t || (x.t == y.t && x.face < y.face);
  });
  HitList merged;
  merged.reserve(std::min(raw.size(), max_hits));
  double group_t = 0.0;
  for (const Hit& hit : raw) {
    if (!merged.empty() && hit.t - group_t < kHitMergeTolerance) {
      if (hit.face < merged.back().face) {
        merged.back() = hit;
      }
      continue;
    }
    if (merged.size() == max_hits) {
      break;
    }
    merged.push_back(hit);
    group_t = hit.t;
  }
  return merged;
}

Bvh::Bvh(const TriangleMesh& mesh) {
  if (mesh.empty()) {
    throw Error(ErrorKind::EmptyMesh, "cannot build a BVH without valid faces");
  }
  face_boxes_.resize(mesh.face_count());
  std::vector<Vec3> centroids(mesh.face_count(), Vec3::Zero());
  for (std::uint32_t f = 0; f < mesh.face_count(); ++f) {
    const auto [a, b, c] = mesh.triangle(f);
    Aabb box;
    box.extend(a);
    box.extend(b);
    box.extend(c);
    const double scale = std::max(box.lo.cwiseAbs().maxCoeff(), box.hi.cwiseAbs().maxCoeff());
    const double pad = kBoxPadding * (1.0 + scale);
    box.lo.array() -= pad;
    box.hi.array() += pad;
    face_boxes_[f] = box;
    centroids[f] = (a + b + c) / 3.0;
    if (mesh.face_valid(f)) {
      face_order_.push_back(f);
    }
  }
  nodes_.reserve(2 * (face_order_.size() / kMaxLeafSize + 1));
  build(0, static_cast<std::uint32_t>(face_order_.size()), centroids);
}

std::uint32_t Bvh::build(std::uint32_t begin, std::uint32_t end, const std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroid_box;
  for (std::uint32_t i = begin; i < end; ++i) {
    box.extend(face_boxes_[face_order_[i]]);
    centroid_box.extend(centroids[face_order_[i]]);
  }
  nodes_[index].box = box;
  if (end - begin <= kMaxLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }

  int axis = 0;
  (centroid_box.hi - centroid_box.lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(
      face_order_.begin() + begin,
      face_order_.begin() + mid,
      face_order_.begin() + end,
      [&](std::uint32_t x, std::uint32_t y) {
        const double cx = centroids[x][axis];
        const double cy = centroids[y][axis];
        return cx < cy || (cx == cy && x < y);
      });
  build(begin, mid, centroids);
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[index].first = right;
  nodes_[index].count = 0;
  return index;
}

HitList intersect_all(
    const Bvh& bvh,
    const TriangleMesh& mesh,
    const Ray& ray,
    std::size_t max_hits,
    double t_min,
    double t_max) {
  if (max_hits == 0) {
    throw Error(ErrorKind::InvalidArgument, "max_hits must be at least 1");
  }
  const Vec3 inverse = ray.direction.cwiseInverse();
  std::vector<Hit> raw;
  std::array<std::uint32_t, 128> stack{};
  std::size_t top = 0;
  stack[top++] = 0;
  const auto& nodes = bvh.nodes();
  const auto& order = bvh.face_order();
  while (top > 0) {
    const std::uint32_t index = stack[--top];
    const Bvh::Node& node = nodes[index];
    if (!ray_hits_box(node.box, ray.origin, ray.direction, inverse, t_min, t_max)) {
      continue;
    }
    if (!node.is_leaf()) {
      stack[top++] = node.first;
      stack[top++] = index + 1;
      continue;
    }
    for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
      const std::uint32_t face = order[i];
      const auto [a, b, c] = mesh.triangle(face);
      if (const auto hit = intersect_triangle(ray, a, b, c, t_min, t_max)) {
        raw.push_back({hit->t, face, hit->u, hit->v, ray.origin.z() + hit->t * ray.direction.z()});
      }
    }
  }
  return merge_hits(std::move(raw), max_hits);
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    return a;
  }
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    return b;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    return a + (d1 / (d1 - d3)) * ab;
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    return c;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    return a + (d2 / (d2 - d6)) * ac;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

ClosestFace closest_face(const Bvh& bvh, const TriangleMesh& mesh, const Vec3& p) {
  ClosestFace best{0, kInfinity, Vec3::Zero()};
  std::array<std::uint32_t, 128> stack{};
  std::size_t top = 0;
  stack[top++] = 0;
  const auto& nodes = bvh.nodes();
  const auto& order = bvh.face_order();
  while (top > 0) {
    const std::uint32_t index = stack[--top];
    const Bvh::Node& node = nodes[index];
    if (node.box.squared_distance(p) > best.squared_distance) {
      continue;
    }
    if (!node.is_leaf()) {
      const std::uint32_t left = index + 1;
      const std::uint32_t right = node.first;
      // Visit the nearer child first.
      if (nodes[left].box.squared_distance(p) <= nodes[right].box.squared_distance(p)) {
        stack[top++] = right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = right;
      }
      continue;
    }
    for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
      const std::uint32_t face = order[i];
      const auto [a, b, c] = mesh.triangle(face);
      const Vec3 q = closest_point_on_triangle(p, a, b, c);
      const double d2 = (p - q).squaredNorm();
      if (d2 < best.squared_distance || (d2 == best.squared_distance && face < best.face)) {
        best = {face, d2, q};
      }
    }
  }
  return best;
}

} // namespace peelkit
