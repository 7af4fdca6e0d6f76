#pragma once

#include "peelkit/bvh.hpp"
#include "peelkit/mesh.hpp"
#include "peelkit/peeled_map.hpp"
#include "peelkit/point_cloud.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace peelkit {

/// Static 3-d tree for exact nearest-neighbor queries.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index;
    double squared_distance;
  };

  /// Throws Error(EmptyCloud) for an empty point set.
  explicit KdTree(std::span<const Vec3> points);

  /// Exact nearest point; ties go to the smaller index.
  Neighbor nearest(const Vec3& query) const;

 private:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    double split = 0.0;
    int axis = -1; // -1 marks a leaf over [begin, end) of order_
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Vec3& query, Neighbor& best) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

struct ChamferTerms {
  double chamfer;
  // Mean squared nearest-neighbor distance from a to b, and from b to a.
  double a_to_b;
  double b_to_a;
};

/// Squared-distance Chamfer: the average of the two directional means.
/// Throws Error(EmptyCloud).
ChamferTerms chamfer_terms(const ColoredPointCloud& a, const ColoredPointCloud& b, std::size_t threads = 0);
double chamfer_distance(const ColoredPointCloud& a, const ColoredPointCloud& b, std::size_t threads = 0);

/// Mean unsquared distance from each point to the nearest mesh face.
/// Throws Error(EmptyCloud) and Error(EmptyMesh).
double point_to_surface(const ColoredPointCloud& cloud, const TriangleMesh& mesh, std::size_t threads = 0);

/// Area-weighted uniform samples on the valid faces of a mesh.
ColoredPointCloud sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed);

struct MetricReport {
  double chamfer = 0.0;
  double p2s = 0.0;
  double pred_to_gt = 0.0;
  double gt_to_pred = 0.0;
};

/// Chamfer between the prediction and `gt_cloud`, and P2S from the
/// prediction to `gt_mesh`.
MetricReport evaluate_reconstruction(
    const ColoredPointCloud& prediction,
    const TriangleMesh& gt_mesh,
    const ColoredPointCloud& gt_cloud,
    std::size_t threads = 0);

/// Scores a predicted stack against the ground-truth mesh peeled through the
/// same camera and layer count, so both clouds share one sampling pattern.
MetricReport evaluate_peeled(const PeeledMapStack& prediction, const TriangleMesh& gt_mesh, std::size_t threads = 0);

/// {"chamfer", "p2s", "pred_to_gt", "gt_to_pred", "CD", "P2S"}; the last two
/// repeat the headline numbers under their usual table names.
std::string format_metric_json(const MetricReport& report);

} // namespace peelkit
