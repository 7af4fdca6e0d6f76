#include "peelkit/metrics.hpp"
#include "peelkit/codec.hpp"
#include "peelkit/error.hpp"
#include "peelkit/parallel.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace peelkit {

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) {
    throw Error(ErrorKind::EmptyCloud, "cannot index an empty point set");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::uint32_t{0});
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[index].begin = begin;
    nodes_[index].end = end;
    return index;
  }
  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
    const double pa = points_[a][axis];
    const double pb = points_[b][axis];
    return pa < pb || (pa == pb && a < b);
  });
  const double split = points_[order_[mid]][axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node& node = nodes_[index];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return index;
}

void KdTree::search(std::uint32_t index, const Vec3& query, Neighbor& best) const {
  const Node& node = nodes_[index];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t p = order_[i];
      const double d2 = (points_[p] - query).squaredNorm();
      if (d2 < best.squared_distance || (d2 == best.squared_distance && p < best.index)) {
        best = {p, d2};
      }
    }
    return;
  }
  const double offset = query[node.axis] - node.split;
  const std::uint32_t near = offset < 0.0 ? node.left : node.right;
  const std::uint32_t far = offset < 0.0 ? node.right : node.left;
  search(near, query, best);
  // Every point beyond the split plane is at least |offset| away.
  if (offset * offset <= best.squared_distance) {
    search(far, query, best);
  }
}

KdTree::Neighbor KdTree::nearest(const Vec3& query) const {
  Neighbor best{0, kInfinity};
  search(0, query, best);
  return best;
}

namespace {

double mean_nearest_squared(const ColoredPointCloud& from, const KdTree& to, std::size_t threads) {
  std::vector<double> distances(from.size());
  parallel_for(from.size(), threads, 1024, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      distances[i] = to.nearest(from.points[i]).squared_distance;
    }
  });
  return pairwise_sum(distances) / static_cast<double>(distances.size());
}

} // namespace

ChamferTerms chamfer_terms(const ColoredPointCloud& a, const ColoredPointCloud& b, std::size_t threads) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::EmptyCloud, "Chamfer distance needs two non-empty clouds");
  }
  const KdTree tree_a(a.points);
  const KdTree tree_b(b.points);
  ChamferTerms terms{};
  terms.a_to_b = mean_nearest_squared(a, tree_b, threads);
  terms.b_to_a = mean_nearest_squared(b, tree_a, threads);
  terms.chamfer = 0.5 * (terms.a_to_b + terms.b_to_a);
  return terms;
}

double chamfer_distance(const ColoredPointCloud& a, const ColoredPointCloud& b, std::size_t threads) {
  return chamfer_terms(a, b, threads).chamfer;
}

double point_to_surface(const ColoredPointCloud& cloud, const TriangleMesh& mesh, std::size_t threads) {
  if (cloud.empty()) {
    throw Error(ErrorKind::EmptyCloud, "P2S needs a non-empty cloud");
  }
  if (mesh.empty()) {
    throw Error(ErrorKind::EmptyMesh, "P2S needs a mesh with valid faces");
  }
  const Bvh bvh(mesh);
  std::vector<double> distances(cloud.size());
  parallel_for(cloud.size(), threads, 512, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      distances[i] = std::sqrt(closest_face(bvh, mesh, cloud.points[i]).squared_distance);
    }
  });
  return pairwise_sum(distances) / static_cast<double>(distances.size());
}

ColoredPointCloud sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (mesh.empty()) {
    throw Error(ErrorKind::EmptyMesh, "cannot sample a mesh without valid faces");
  }
  std::vector<double> cumulative;
  std::vector<std::uint32_t> faces;
  double total = 0.0;
  for (std::uint32_t f = 0; f < mesh.face_count(); ++f) {
    if (mesh.face_valid(f)) {
      total += mesh.face_area(f);
      cumulative.push_back(total);
      faces.push_back(f);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ColoredPointCloud cloud;
  cloud.points.reserve(count);
  if (mesh.has_colors()) {
    cloud.colors.reserve(count);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = unit(rng) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const std::size_t slot = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), faces.size() - 1);
    const std::uint32_t face = faces[slot];
    double r1 = std::sqrt(unit(rng));
    double r2 = unit(rng);
    const double wa = 1.0 - r1;
    const double wb = r1 * (1.0 - r2);
    const double wc = r1 * r2;
    const auto [a, b, c] = mesh.triangle(face);
    cloud.points.push_back(wa * a + wb * b + wc * c);
    if (mesh.has_colors()) {
      const Face& idx = mesh.faces()[face];
      cloud.colors.push_back(wa * mesh.colors()[idx[0]] + wb * mesh.colors()[idx[1]] + wc * mesh.colors()[idx[2]]);
    }
  }
  return cloud;
}

MetricReport evaluate_reconstruction(
    const ColoredPointCloud& prediction,
    const TriangleMesh& gt_mesh,
    const ColoredPointCloud& gt_cloud,
    std::size_t threads) {
  const ChamferTerms terms = chamfer_terms(prediction, gt_cloud, threads);
  MetricReport report;
  report.chamfer = terms.chamfer;
  report.pred_to_gt = terms.a_to_b;
  report.gt_to_pred = terms.b_to_a;
  report.p2s = point_to_surface(prediction, gt_mesh, threads);
  return report;
}

MetricReport evaluate_peeled(const PeeledMapStack& prediction, const TriangleMesh& gt_mesh, std::size_t threads) {
  const ColoredPointCloud gt_cloud =
      decode_pointcloud(encode_peeled(gt_mesh, prediction.camera(), prediction.layers(), threads));
  return evaluate_reconstruction(decode_pointcloud(prediction), gt_mesh, gt_cloud, threads);
}

std::string format_metric_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["chamfer"] = report.chamfer;
  j["p2s"] = report.p2s;
  j["pred_to_gt"] = report.pred_to_gt;
  j["gt_to_pred"] = report.gt_to_pred;
  j["CD"] = report.chamfer;
  j["P2S"] = report.p2s;
  return j.dump(2) + "\n";
}

} // namespace peelkit
