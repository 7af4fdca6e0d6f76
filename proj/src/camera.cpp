#include "peelkit/camera.hpp"
#include "peelkit/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace peelkit {

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "pose matrix has non-finite entries");
  }
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
    throw Error(ErrorKind::InvalidArgument, "pose matrix bottom row must be (0, 0, 0, 1)");
  }
  RigidTransform pose;
  pose.rotation = m.topLeftCorner<3, 3>();
  pose.translation = m.topRightCorner<3, 1>();
  const double error = (pose.rotation.transpose() * pose.rotation - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (error > 1e-6 || pose.rotation.determinant() < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "pose rotation is not a proper orthonormal matrix");
  }
  return pose;
}

Ray Ray::through(const Vec3& origin, const Vec3& direction) {
  const double length = direction.norm();
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw Error(ErrorKind::InvalidArgument, "ray direction must be a finite nonzero vector");
  }
  return {origin, direction / length};
}

PinholeCamera::PinholeCamera(
    double fx,
    double fy,
    double cx,
    double cy,
    std::uint32_t width,
    std::uint32_t height,
    RigidTransform pose)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height), pose_(std::move(pose)) {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("focal lengths must be positive (fx={}, fy={})", fx, fy));
  }
  if (width == 0 || height == 0) {
    throw Error(ErrorKind::InvalidArgument, "image size must be nonzero");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw Error(
        ErrorKind::InvalidArgument,
        fmt::format("principal point ({}, {}) outside {}x{} image", cx, cy, width, height));
  }
  // Re-validate the rotation even when the pose was built by hand.
  RigidTransform::from_matrix(pose_.matrix());
}

Ray PinholeCamera::pixel_ray(std::uint32_t u, std::uint32_t v) const {
  const Vec3 direction((u + 0.5 - cx_) / fx_, (v + 0.5 - cy_) / fy_, 1.0);
  return {Vec3::Zero(), direction.normalized()};
}

PinholeCamera PinholeCamera::resized(std::uint32_t width, std::uint32_t height) const {
  const double sx = static_cast<double>(width) / width_;
  const double sy = static_cast<double>(height) / height_;
  return PinholeCamera(fx_ * sx, fy_ * sy, cx_ * sx, cy_ * sy, width, height, pose_);
}

bool PinholeCamera::matches(const PinholeCamera& other, double tolerance) const {
  auto close = [tolerance](double a, double b) { return std::abs(a - b) <= tolerance; };
  return width_ == other.width_ && height_ == other.height_ && close(fx_, other.fx_) &&
      close(fy_, other.fy_) && close(cx_, other.cx_) && close(cy_, other.cy_) &&
      (pose_.matrix() - other.pose_.matrix()).cwiseAbs().maxCoeff() <= tolerance;
}

TriangleMesh to_camera_space(const TriangleMesh& mesh, const RigidTransform& pose) {
  std::vector<Vec3> moved;
  moved.reserve(mesh.vertex_count());
  for (const Vec3& v : mesh.vertices()) {
    moved.push_back(pose.apply(v));
  }
  return mesh.with_vertices(std::move(moved));
}

} // namespace peelkit
