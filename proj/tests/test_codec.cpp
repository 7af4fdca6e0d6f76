#include "peelkit/codec.hpp"
#include "peelkit/error.hpp"
#include "peelkit/metrics.hpp"
#include "peelkit/primitives.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <set>

namespace peelkit {
namespace {

TEST(EncodePeeled, SphereCenterPixelMatchesAnalyticDepths) {
  const TriangleMesh sphere = make_icosphere(4, 1.0, Vec3(0, 0, 2.5));
  const PeeledMapStack stack = encode_peeled(sphere, test::square_camera(64, 64), 4);
  EXPECT_NEAR(stack.depth(0, 32, 32), 1.5, 5e-3);
  EXPECT_NEAR(stack.depth(1, 32, 32), 3.5, 5e-3);
  EXPECT_EQ(stack.depth(2, 32, 32), 0.0f);
  EXPECT_EQ(stack.depth(3, 32, 32), 0.0f);
  EXPECT_FALSE(stack.has_rgb());
  EXPECT_NO_THROW(stack.validate());
}

TEST(EncodePeeled, MeshBehindCameraIsAllBackground) {
  const TriangleMesh sphere = make_icosphere(3, 1.0, Vec3(0, 0, -3));
  const PeeledMapStack stack = encode_peeled(sphere, test::square_camera(32, 32), 4);
  EXPECT_EQ(stack.nonzero_count(), 0u);
}

TEST(EncodePeeled, ParallelQuadsGiveConstantLayers) {
  // At 64 px focal length and 64 px width the frustum spans |x| <= 0.5 z.
  const TriangleMesh quads = merge_meshes(make_quad(1.0, 2.0), make_quad(2.0, 4.0));
  const PeeledMapStack stack = encode_peeled(quads, test::square_camera(64, 64), 4);
  for (std::uint32_t y = 0; y < 64; ++y) {
    for (std::uint32_t x = 0; x < 64; ++x) {
      ASSERT_EQ(stack.depth(0, y, x), 1.0f);
      ASSERT_EQ(stack.depth(1, y, x), 2.0f);
      ASSERT_EQ(stack.depth(2, y, x), 0.0f);
      ASSERT_EQ(stack.depth(3, y, x), 0.0f);
    }
  }
}

TEST(EncodePeeled, RejectsEmptyMeshAndZeroLayers) {
  try {
    encode_peeled(TriangleMesh(), test::square_camera(8, 8), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyMesh);
  }
  EXPECT_THROW(encode_peeled(make_icosphere(1), test::square_camera(8, 8), 0), Error);
}

TEST(EncodePeeled, InterpolatesVertexColors) {
  // Red at the left edge, blue at the right edge of a quad at z = 1.
  std::vector<Vec3> vertices = {{-1, -1, 1}, {1, -1, 1}, {1, 1, 1}, {-1, 1, 1}};
  std::vector<Vec3> colors = {{1, 0, 0}, {0, 0, 1}, {0, 0, 1}, {1, 0, 0}};
  const TriangleMesh quad(vertices, {{0, 2, 1}, {0, 3, 2}}, colors);
  const PeeledMapStack stack = encode_peeled(quad, test::square_camera(16, 16), 2);
  ASSERT_TRUE(stack.has_rgb());
  for (std::uint32_t x = 0; x < 16; ++x) {
    // Pixel center x in camera space: (x + 0.5 - 8) / 16 at z = 1.
    const double world_x = (x + 0.5 - 8.0) / 16.0;
    const auto rgb = stack.rgb(0, 5, x);
    EXPECT_NEAR(rgb[0], (1.0 - world_x) / 2.0, 1e-6);
    EXPECT_NEAR(rgb[2], (1.0 + world_x) / 2.0, 1e-6);
    EXPECT_NEAR(rgb[1], 0.0, 1e-6);
  }
}

TEST(EncodePeeled, InvariantsHoldOnRandomMeshesAndCameras) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> angle(-0.4, 0.4);
  for (int trial = 0; trial < 10; ++trial) {
    TriangleMesh soup = test::random_soup(300, 100 + trial, 1.0, 0.4);
    RigidTransform pose;
    pose.rotation = Eigen::AngleAxisd(angle(rng), Vec3::UnitY()).toRotationMatrix();
    pose.translation = Vec3(0, 0, 2.5);
    const PeeledMapStack stack = encode_peeled(soup, test::square_camera(40, 30, pose), 3);
    EXPECT_NO_THROW(stack.validate());
    EXPECT_GT(stack.nonzero_count(), 0u);
  }
}

TEST(EncodePeeled, IndependentOfThreadCount) {
  const TriangleMesh mesh = with_position_colors(make_torus(0.8, 0.3, 32, 16, Vec3(0, 0, 3)));
  const PinholeCamera camera = test::square_camera(96, 80);
  const PeeledMapStack one = encode_peeled(mesh, camera, 4, 1);
  for (std::size_t threads : {2u, 3u, 8u}) {
    EXPECT_TRUE(encode_peeled(mesh, camera, 4, threads) == one);
  }
}

TEST(DecodePointcloud, EmptyStackGivesEmptyCloud) {
  const PeeledMapStack stack(test::square_camera(8, 8), 4, true);
  EXPECT_TRUE(decode_pointcloud(stack).empty());
}

TEST(DecodePointcloud, PrincipalPixel) {
  // cx = cy = 4.5 puts pixel (4, 4) exactly on the principal ray.
  PeeledMapStack stack(PinholeCamera(10, 10, 4.5, 4.5, 9, 9), 1, false);
  stack.set_depth(0, 4, 4, 2.0f);
  const ColoredPointCloud cloud = decode_pointcloud(stack);
  ASSERT_EQ(cloud.size(), 1u);
  EXPECT_EQ(cloud.points[0], Vec3(0, 0, 2));
  EXPECT_EQ(cloud.layer_ids[0], 0);
}

TEST(DecodePointcloud, SphereRoundTripLiesOnSurface) {
  const TriangleMesh sphere = make_icosphere(4, 1.0, Vec3(0, 0, 2.5));
  const ColoredPointCloud cloud = decode_pointcloud(encode_peeled(sphere, test::square_camera(64, 64), 4));
  ASSERT_GT(cloud.size(), 1000u);
  for (const Vec3& p : cloud.points) {
    EXPECT_LT(std::abs((p - Vec3(0, 0, 2.5)).norm() - 1.0), 5e-3);
  }
}

TEST(DecodePointcloud, RoundTripUnderPoseLiesOnMesh) {
  RigidTransform pose;
  pose.rotation = Eigen::AngleAxisd(0.5, Vec3(0.2, 1, 0).normalized()).toRotationMatrix();
  pose.translation = Vec3(0.1, -0.2, 3.0);
  const PinholeCamera camera = test::square_camera(64, 70, pose);
  const TriangleMesh mesh = with_position_colors(make_torus(0.7, 0.25, 24, 12));
  const PeeledMapStack stack = encode_peeled(mesh, camera, 4);
  const ColoredPointCloud cloud = decode_pointcloud(stack);
  EXPECT_EQ(cloud.size(), stack.nonzero_count());
  EXPECT_EQ(cloud.colors.size(), cloud.size());
  EXPECT_LT(point_to_surface(cloud, mesh), 1e-6);
}

TEST(SubsampleUniform, SmallCloudIsUnchanged) {
  const ColoredPointCloud cloud = test::random_cloud(100, 1);
  const ColoredPointCloud out = subsample_uniform(cloud, 100, 7);
  EXPECT_EQ(out.points, cloud.points);
}

TEST(SubsampleUniform, ExactCountDeterministicSubset) {
  const ColoredPointCloud cloud = test::random_cloud(50000, 2);
  const ColoredPointCloud a = subsample_uniform(cloud, 20000, 42);
  const ColoredPointCloud b = subsample_uniform(cloud, 20000, 42);
  const ColoredPointCloud c = subsample_uniform(cloud, 20000, 43);
  EXPECT_EQ(a.size(), 20000u);
  EXPECT_EQ(a.points, b.points);
  EXPECT_NE(a.points, c.points);
  auto key = [](const Vec3& p) { return std::tuple(p.x(), p.y(), p.z()); };
  std::set<std::tuple<double, double, double>> source;
  for (const Vec3& p : cloud.points) {
    source.insert(key(p));
  }
  for (const auto* sample : {&a, &c}) {
    std::set<std::tuple<double, double, double>> distinct;
    for (const Vec3& p : sample->points) {
      EXPECT_TRUE(source.count(key(p)));
      distinct.insert(key(p));
    }
    EXPECT_EQ(distinct.size(), sample->size());
  }
}

TEST(SubsampleUniform, ZeroTargetIsRejected) {
  EXPECT_THROW(subsample_uniform(test::random_cloud(10, 1), 0, 1), Error);
}

} // namespace
} // namespace peelkit
