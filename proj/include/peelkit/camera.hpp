#pragma once

#include "peelkit/mesh.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace peelkit {

/// Rigid world-to-camera transform: p_cam = rotation * p_world + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const {
    return rotation * p + translation;
  }
  Vec3 apply_inverse(const Vec3& p) const {
    return rotation.transpose() * (p - translation);
  }

  Eigen::Matrix4d matrix() const;

  /// Throws Error(InvalidArgument) unless the upper-left block is orthonormal
  /// within 1e-6 and the bottom row is (0, 0, 0, 1).
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);

  bool operator==(const RigidTransform&) const = default;
};

/// Camera-space ray with a unit direction.
struct Ray {
  Vec3 origin;
  Vec3 direction;

  /// Normalizes `direction`; throws Error(InvalidArgument) on a zero vector.
  static Ray through(const Vec3& origin, const Vec3& direction);
};

/// Pinhole intrinsics plus pose. Camera looks down +z with image v pointing
/// along +y; pixel (u, v) covers [u, u+1) x [v, v+1).
class PinholeCamera {
 public:
  /// Throws Error(InvalidArgument) if fx, fy <= 0, the principal point lies
  /// outside the image, or the image is empty.
  PinholeCamera(
      double fx,
      double fy,
      double cx,
      double cy,
      std::uint32_t width,
      std::uint32_t height,
      RigidTransform pose = {});

  double fx() const noexcept {
    return fx_;
  }
  double fy() const noexcept {
    return fy_;
  }
  double cx() const noexcept {
    return cx_;
  }
  double cy() const noexcept {
    return cy_;
  }
  std::uint32_t width() const noexcept {
    return width_;
  }
  std::uint32_t height() const noexcept {
    return height_;
  }
  const RigidTransform& pose() const noexcept {
    return pose_;
  }

  /// Camera-space ray through the center of pixel (u, v).
  Ray pixel_ray(std::uint32_t u, std::uint32_t v) const;

  /// Camera-space point at z-depth `depth` under pixel (u, v).
  Vec3 back_project(std::uint32_t u, std::uint32_t v, double depth) const {
    return {
        (u + 0.5 - cx_) * depth / fx_,
        (v + 0.5 - cy_) * depth / fy_,
        depth,
    };
  }

  /// Same field of view at a new image size.
  PinholeCamera resized(std::uint32_t width, std::uint32_t height) const;

  /// Intrinsics, size and pose agree within `tolerance`.
  bool matches(const PinholeCamera& other, double tolerance = 1e-9) const;

  bool operator==(const PinholeCamera&) const = default;

 private:
  double fx_;
  double fy_;
  double cx_;
  double cy_;
  std::uint32_t width_;
  std::uint32_t height_;
  RigidTransform pose_;
};

/// Transforms every vertex from world to camera space.
TriangleMesh to_camera_space(const TriangleMesh& mesh, const RigidTransform& pose);

} // namespace peelkit
