// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "peelkit/bvh.hpp"
#include "peelkit/codec.hpp"
#include "peelkit/dataset.hpp"
#include "peelkit/fusion.hpp"
#include "peelkit/io_util.hpp"
#include "peelkit/metrics.hpp"
#include "peelkit/objectives.hpp"
#include "peelkit/parallel.hpp"
#include "peelkit/peel_io.hpp"
#include "peelkit/primitives.hpp"

#include "support.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>

#include <chrono>
#include <functional>
#include <numbers>
#include <thread>

namespace peelkit {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

RigidTransform look_pose(double yaw, double pitch, const Vec3& translation) {
  RigidTransform pose;
  pose.rotation = (Eigen::AngleAxisd(pitch, Vec3::UnitX()) * Eigen::AngleAxisd(yaw, Vec3::UnitY())).toRotationMatrix();
  pose.translation = translation;
  return pose;
}

Outcome intersection_oracle() {
  const auto start = Clock::now();
  std::size_t mismatches = 0;
  std::size_t total_hits = 0;
  for (std::uint64_t m = 0; m < 20; ++m) {
    TriangleMesh mesh;
    switch (m % 4) {
      case 0:
        mesh = test::random_soup(500 + 75 * m, 1000 + m);
        break;
      case 1:
        mesh = make_icosphere(3, 1.0 + 0.05 * m);
        break;
      case 2:
        mesh = make_torus(1.0, 0.35, 40, 24);
        break;
      default:
        mesh = merge_meshes(make_box(Vec3(0.2, 0, 0), Vec3(0.8, 0.5, 0.6)), test::random_soup(1000, 2000 + m, 1.0, 0.2));
        break;
    }
    const Bvh bvh(mesh);
    std::mt19937_64 rng(3000 + m);
    for (int r = 0; r < 10000; ++r) {
      const Ray ray = test::random_ray(rng);
      const std::size_t max_hits = 1 + r % 8;
      const HitList fast = intersect_all(bvh, mesh, ray, max_hits);
      const HitList slow = test::naive_intersect_all(mesh, ray, max_hits);
      total_hits += slow.size();
      bool same = fast.size() == slow.size();
      for (std::size_t i = 0; same && i < fast.size(); ++i) {
        same = fast[i].face == slow[i].face && std::abs(fast[i].t - slow[i].t) <= 1e-9;
      }
      mismatches += same ? 0 : 1;
    }
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < 60.0,
          fmt::format("200000 rays, {} hits, {} mismatching rays, {:.2f} s single-threaded", total_hits, mismatches, elapsed)};
}

Outcome analytic_encode() {
  const TriangleMesh sphere = make_icosphere(4, 1.0, Vec3(0, 0, 2.5));
  // Principal point on a pixel center so the center ray is the optical axis.
  const PinholeCamera camera(512, 512, 256.5, 256.5, 512, 512);
  const PeeledMapStack stack = encode_peeled(sphere, camera, 4);
  const std::array<double, 4> expected = {1.5, 3.5, 0.0, 0.0};
  double sphere_error = 0.0;
  for (std::size_t l = 0; l < 4; ++l) {
    sphere_error = std::max(sphere_error, std::abs(stack.depth(l, 256, 256) - expected[l]));
  }
  const TriangleMesh quads = merge_meshes(make_quad(1.0, 2.0), make_quad(2.0, 4.0));
  const PeeledMapStack planes = encode_peeled(quads, test::square_camera(512, 512), 4);
  double quad_error = 0.0;
  for (std::uint32_t y = 0; y < 512; ++y) {
    for (std::uint32_t x = 0; x < 512; ++x) {
      quad_error = std::max(
          {quad_error,
           std::abs(planes.depth(0, y, x) - 1.0),
           std::abs(planes.depth(1, y, x) - 2.0),
           std::abs(static_cast<double>(planes.depth(2, y, x))),
           std::abs(static_cast<double>(planes.depth(3, y, x)))});
    }
  }
  return {sphere.face_count() >= 5000 && sphere_error <= 5e-3 && quad_error <= 1e-9,
          fmt::format(
              "icosphere {} faces, center depths [{:.5f}, {:.5f}, {}, {}], max error {:.2e}; quads max error {:.1e}",
              sphere.face_count(),
              stack.depth(0, 256, 256),
              stack.depth(1, 256, 256),
              stack.depth(2, 256, 256),
              stack.depth(3, 256, 256),
              sphere_error,
              quad_error)};
}

Outcome round_trip() {
  struct Fixture {
    TriangleMesh mesh;
    RigidTransform pose;
  };
  const Vec3 ahead(0, 0, 3);
  std::vector<Fixture> fixtures = {
      {make_icosphere(4, 1.0, ahead), {}},
      {make_uv_sphere(24, 36, 0.8, ahead), look_pose(0.3, 0.1, Vec3(0.1, 0, 0))},
      {make_uv_sphere(24, 36, 0.8, Vec3::Zero(), true), look_pose(0.0, 0.5, Vec3(0, 0, 2.5))},
      {make_box(ahead, Vec3(0.6, 0.4, 0.5)), look_pose(0.5, -0.3, Vec3(0, 0, 0.2))},
      {make_torus(0.8, 0.3, 48, 24), look_pose(0.2, 0.9, Vec3(0, 0, 3))},
      {with_position_colors(make_torus(0.7, 0.2, 32, 16, Vec3(0.2, 0.1, 0))), look_pose(-0.4, 0.2, Vec3(0, 0, 2.5))},
      {merge_meshes(make_quad(1.0, 2.0), make_quad(2.0, 4.0)), {}},
      {test::random_soup(800, 77, 0.8, 0.3), look_pose(0.1, 0.1, Vec3(0, 0, 3))},
      {merge_meshes(make_icosphere(3, 0.5), make_icosphere(3, 0.9)), look_pose(1.0, 0.0, Vec3(0, 0, 3))},
      {merge_meshes(make_box(Vec3(-0.4, 0, 0), Vec3(0.3, 0.3, 0.3)), make_icosphere(2, 0.3, Vec3(0.4, 0, 0))),
       look_pose(0.7, 0.3, Vec3(0, 0, 2))},
  };
  double worst = 0.0;
  bool counts_match = true;
  std::size_t points = 0;
  for (const Fixture& f : fixtures) {
    const PeeledMapStack stack = encode_peeled(f.mesh, test::square_camera(128, 128, f.pose), 4);
    const ColoredPointCloud cloud = decode_pointcloud(stack);
    counts_match = counts_match && cloud.size() == stack.nonzero_count() && !cloud.empty();
    points += cloud.size();
    worst = std::max(worst, point_to_surface(cloud, f.mesh));
  }
  return {worst < 1e-6 && counts_match,
          fmt::format("10 meshes, {} points, worst P2S {:.2e} m, point counts {}", points, worst, counts_match ? "match" : "differ")};
}

Outcome fusion_algebra() {
  std::mt19937_64 rng(4);
  const PinholeCamera camera = test::square_camera(8, 8);
  std::size_t branch_violations = 0;
  std::size_t identity_violations = 0;
  std::size_t joint = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PeeledMapStack smpl = test::random_stack(camera, 4, rng);
    const PeeledMapStack peel = test::random_stack(camera, 4, rng);
    const ResidualDeformationStack rd = test::random_rd(camera, 4, rng);
    const PeeledMapStack raw = fuse_layers_unsorted(smpl, rd, peel);
    for (std::size_t i = 0; i < raw.depth_data().size(); ++i) {
      const bool mask = rd.validity_data()[i] && peel.depth_data()[i] > 0.0f;
      const double deformed = static_cast<double>(smpl.depth_data()[i]) + rd.delta_data()[i];
      const float prior_branch = deformed > kNearPlane ? static_cast<float>(deformed) : 0.0f;
      branch_violations += raw.depth_data()[i] != (mask ? prior_branch : peel.depth_data()[i]);
    }
    const PeeledMapStack clothed = test::random_stack(camera, 4, rng);
    const PeeledMapStack fused =
        fuse_maps(smpl, compute_rd_gt(smpl, clothed, std::numeric_limits<double>::infinity()), clothed);
    for (std::size_t i = 0; i < fused.depth_data().size(); ++i) {
      if (smpl.depth_data()[i] > 0.0f && clothed.depth_data()[i] > 0.0f) {
        ++joint;
        identity_violations += fused.depth_data()[i] != clothed.depth_data()[i];
      }
    }
  }
  return {branch_violations == 0 && identity_violations == 0,
          fmt::format(
              "1000 stacks, {} cells off both branches; identity checked on {} jointly valid cells, {} differ",
              branch_violations,
              joint,
              identity_violations)};
}

double worst_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double gap = a.size() == b.size() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    gap = std::max(gap, std::abs(a[i] - b[i]));
  }
  return gap;
}

Outcome loss_suite() {
  std::mt19937_64 rng(5);
  const PinholeCamera camera = test::square_camera(8, 8);
  double zero_worst = 0.0;
  double oracle_worst = 0.0;
  double total_worst = 0.0;
  const LossWeights weights{1.0, 0.1, 0.001};
  for (int trial = 0; trial < 200; ++trial) {
    const PeeledMapStack pred = test::random_stack(camera, 4, rng, true);
    const PeeledMapStack gt = test::random_stack(camera, 4, rng, true);
    const ResidualDeformationStack pred_rd = test::random_rd(camera, 4, rng);
    const ResidualDeformationStack gt_rd = test::random_rd(camera, 4, rng);
    const PeeledMapStack smpl = test::random_stack(camera, 4, rng);

    const LossReport same = total_loss({gt, gt, gt_rd, gt_rd, smpl}, weights);
    zero_worst = std::max({zero_worst, same.l_peel, same.l_rd, same.l_sm, same.l_rgb, same.total});

    const auto peel = test::oracle_peel(pred, gt);
    const auto rd = test::oracle_rd(pred_rd, gt_rd);
    const auto sm = test::oracle_smooth(pred_rd, gt_rd, smpl);
    const auto rgb = test::oracle_rgb(pred, gt);
    oracle_worst = std::max(
        {oracle_worst,
         worst_gap(loss_peel(pred, gt), peel),
         worst_gap(loss_rd(pred_rd, gt_rd), rd),
         worst_gap(loss_smooth(pred_rd, gt_rd, smpl), sm),
         worst_gap(loss_rgb(pred, gt), rgb)});

    auto sum = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) {
        s += x;
      }
      return s;
    };
    const double expected =
        sum(peel) + weights.lambda_rd * sum(rd) + weights.lambda_rgb * sum(rgb) + weights.lambda_sm * sum(sm);
    const LossReport report = total_loss({pred, gt, pred_rd, gt_rd, smpl}, weights);
    total_worst = std::max(total_worst, std::abs(report.total - expected) / expected);
  }
  return {zero_worst == 0.0 && oracle_worst <= 1e-12 && total_worst <= 1e-12,
          fmt::format(
              "200 random 8x8 sets: identical-input max {}, worst oracle gap {:.1e}, worst total relative gap {:.1e}",
              zero_worst,
              oracle_worst,
              total_worst)};
}

Outcome metric_oracles() {
  double chamfer_gap = 0.0;
  double p2s_gap = 0.0;
  bool symmetric = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ColoredPointCloud a = test::random_cloud(500, 10 + seed);
    const ColoredPointCloud b = test::random_cloud(500, 20 + seed, 0.7);
    chamfer_gap = std::max(chamfer_gap, std::abs(chamfer_distance(a, b) - test::naive_chamfer(a, b)));
    symmetric = symmetric && chamfer_distance(a, b) == chamfer_distance(b, a);
    const TriangleMesh mesh = test::random_soup(2000, 30 + seed);
    p2s_gap = std::max(p2s_gap, std::abs(point_to_surface(a, mesh) - test::naive_p2s(a, mesh)));
  }
  const TriangleMesh gt = make_icosphere(4, 1.0, Vec3(0, 0, 3));
  const MetricReport report = evaluate_peeled(encode_peeled(gt, test::square_camera(256, 256), 4), gt);
  return {chamfer_gap <= 1e-12 && p2s_gap <= 1e-12 && symmetric && report.chamfer < 1e-6 && report.p2s < 1e-6,
          fmt::format(
              "chamfer gap {:.1e}, P2S gap {:.1e}, symmetry {}; encoded ground truth CD {:.2e}, P2S {:.2e}",
              chamfer_gap,
              p2s_gap,
              symmetric ? "exact" : "broken",
              report.chamfer,
              report.p2s)};
}

Outcome rd_clamp() {
  std::mt19937_64 rng(7);
  const PinholeCamera camera = test::square_camera(8, 8);
  double worst = 0.0;
  std::size_t clamped = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const ResidualDeformationStack rd =
        compute_rd_gt(test::random_stack(camera, 4, rng), test::random_stack(camera, 4, rng));
    for (double d : rd.delta_data()) {
      worst = std::max(worst, std::abs(d));
      clamped += std::abs(d) == kDefaultRdLimit;
    }
  }
  return {worst <= 0.15, fmt::format("1000 pairs, max |offset| {}, {} offsets at the limit", worst, clamped)};
}

Outcome dataset_subtraction() {
  auto removed_fraction = [](const TriangleMesh& body, const TriangleMesh& garment) {
    const auto flags = occluded_body_faces(body, garment);
    return static_cast<double>(std::count(flags.begin(), flags.end(), std::uint8_t{1})) / body.face_count();
  };
  const double concentric = removed_fraction(make_icosphere(3, 1.0), make_icosphere(4, 1.2));
  const double disjoint = removed_fraction(make_icosphere(3, 1.0), make_icosphere(3, 0.5, Vec3(3, 0, 0)));

  const TriangleMesh body = make_uv_sphere(32, 48, 1.0);
  const TriangleMesh shell = make_uv_sphere(32, 48, 1.1, Vec3::Zero(), true);
  const auto flags = occluded_body_faces(body, shell);
  std::size_t agree = 0;
  for (std::size_t f = 0; f < body.face_count(); ++f) {
    const Vec3 c = body.face_centroid(f);
    agree += (c.norm() < 1.1 && c.y() > 0.0) == (flags[f] != 0);
  }
  const double agreement = static_cast<double>(agree) / body.face_count();
  return {concentric == 1.0 && disjoint == 0.0 && agreement >= 0.99,
          fmt::format(
              "concentric removes {:.1f}%, disjoint removes {:.1f}%, hemisphere agrees on {:.2f}% of faces",
              100 * concentric,
              100 * disjoint,
              100 * agreement)};
}

std::string snapshot_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& file : files) {
    all += file.filename().string() + '\n' + read_file(file);
  }
  return all;
}

Outcome determinism() {
  const TriangleMesh body = make_icosphere(3, 0.5, Vec3(0, 0, 3));
  const TriangleMesh garment = make_uv_sphere(24, 32, 0.58, Vec3(0.02, 0.05, 3.0), true);
  const TriangleMesh colored = with_position_colors(make_torus(0.8, 0.3, 64, 32, Vec3(0, 0, 3)));
  const PinholeCamera camera = test::square_camera(96, 96);
  std::mt19937_64 rng(9);
  const PeeledMapStack smpl = test::random_stack(camera, 4, rng);
  const PeeledMapStack peel = test::random_stack(camera, 4, rng, true);
  const ResidualDeformationStack rd = test::random_rd(camera, 4, rng);
  const std::vector<double> yaws = {45, 60, -45};

  auto run_all = [&](std::size_t threads) {
    std::vector<std::string> outputs;
    const PeeledMapStack encoded = encode_peeled(colored, camera, 4, threads);
    outputs.push_back(serialize_peel(encoded));
    outputs.push_back(serialize_peel(fuse_maps(smpl, rd, peel, threads)));
    outputs.push_back(format_metric_json(evaluate_peeled(encoded, colored, threads)));
    const ColoredPointCloud cloud = sample_surface(colored, 3000, 1);
    outputs.push_back(format_metric_json(evaluate_reconstruction(cloud, body, decode_pointcloud(encoded), threads)));
    test::TempDir dir("acceptance_dataset");
    GroundTruthOptions options;
    options.threads = threads;
    const TriangleMesh clothed = subtract_body(body, garment, {}, threads);
    write_ground_truth(make_ground_truth(clothed, body, camera, yaws, options), dir.path());
    outputs.push_back(snapshot_directory(dir.path()));
    return outputs;
  };
  const auto reference = run_all(1);
  std::size_t differing = 0;
  for (std::size_t threads : {1u, 4u, 8u}) {
    const auto outputs = run_all(threads);
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      differing += outputs[i] != reference[i];
    }
  }
  return {differing == 0,
          fmt::format("encode, fuse, metrics (2 modes), dataset at 1, 4, 8 threads after a 1-thread reference run: {} outputs differ", differing)};
}

Outcome throughput() {
  // About 50k faces: a torus and a sphere filling most of the frame.
  const TriangleMesh mesh = merge_meshes(
      make_torus(0.9, 0.35, 202, 100, Vec3(0, 0, 3)), make_uv_sphere(50, 100, 0.45, Vec3(0, 0, 3)));
  const PinholeCamera camera = test::square_camera(512, 512);
  const std::size_t cores = std::max(1u, std::thread::hardware_concurrency());
  encode_peeled(mesh, camera.resized(64, 64), 4, cores);
  const auto start = Clock::now();
  const PeeledMapStack stack = encode_peeled(mesh, camera, 4, cores);
  const double elapsed = seconds_since(start);
  return {mesh.face_count() >= 50000 && elapsed < 2.0,
          fmt::format(
              "{} faces, 512x512x4, {} surface samples in {:.3f} s on {} hardware thread(s)",
              mesh.face_count(),
              stack.nonzero_count(),
              elapsed,
              cores)};
}

} // namespace
} // namespace peelkit

int main() {
  using peelkit::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"intersection oracle", peelkit::intersection_oracle},
      {"analytic encode", peelkit::analytic_encode},
      {"decode round trip", peelkit::round_trip},
      {"fusion algebra", peelkit::fusion_algebra},
      {"loss suite", peelkit::loss_suite},
      {"metric oracles", peelkit::metric_oracles},
      {"offset clamp", peelkit::rd_clamp},
      {"body subtraction", peelkit::dataset_subtraction},
      {"determinism", peelkit::determinism},
      {"encode throughput", peelkit::throughput},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    fmt::print("{} {:>2} {}: {}\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, outcome.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
