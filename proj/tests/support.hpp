#pragma once

// Test-only helpers: random fixtures and brute-force oracles that do not go
// through the acceleration structures under test.

#include "peelkit/bvh.hpp"
#include "peelkit/fusion.hpp"
#include "peelkit/mesh.hpp"
#include "peelkit/peeled_map.hpp"
#include "peelkit/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <tuple>
#include <unistd.h>
#include <string>
#include <vector>

namespace peelkit::test {

inline PinholeCamera square_camera(std::uint32_t size, double focal, RigidTransform pose = {}) {
  return PinholeCamera(focal, focal, size / 2.0, size / 2.0, size, size, std::move(pose));
}

inline TriangleMesh random_soup(std::size_t faces, std::uint64_t seed, double extent = 1.0, double size = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> position(-extent, extent);
  std::uniform_real_distribution<double> offset(-size, size);
  std::vector<Vec3> vertices;
  std::vector<Face> tris;
  for (std::size_t f = 0; f < faces; ++f) {
    const Vec3 anchor(position(rng), position(rng), position(rng));
    const auto base = static_cast<std::uint32_t>(vertices.size());
    for (int k = 0; k < 3; ++k) {
      vertices.push_back(anchor + Vec3(offset(rng), offset(rng), offset(rng)));
    }
    tris.push_back({base, base + 1, base + 2});
  }
  return TriangleMesh(std::move(vertices), std::move(tris));
}

inline Ray random_ray(std::mt19937_64& rng, double extent = 2.0) {
  std::uniform_real_distribution<double> position(-extent, extent);
  std::normal_distribution<double> gaussian(0.0, 1.0);
  Vec3 direction;
  do {
    direction = Vec3(gaussian(rng), gaussian(rng), gaussian(rng));
  } while (direction.norm() < 1e-3);
  return Ray::through(Vec3(position(rng), position(rng), position(rng)), direction);
}

// Every valid face, sorted by (t, face) and merged within 1e-9 keeping the
// smaller face id.
inline HitList naive_intersect_all(
    const TriangleMesh& mesh,
    const Ray& ray,
    std::size_t max_hits,
    double t_min = kRayEpsilon,
    double t_max = kInfinity) {
  std::vector<Hit> raw;
  for (std::uint32_t f = 0; f < mesh.face_count(); ++f) {
    if (!mesh.face_valid(f)) {
      continue;
    }
    const auto [a, b, c] = mesh.triangle(f);
    if (auto hit = intersect_triangle(ray, a, b, c, t_min, t_max)) {
      raw.push_back({hit->t, f, hit->u, hit->v, ray.origin.z() + hit->t * ray.direction.z()});
    }
  }
  std::sort(raw.begin(), raw.end(), [](const Hit& x, const Hit& y) {
    return std::tie(x.t, x.face) < std::tie(y.t, y.face);
  });
  HitList out;
  std::size_t group_start = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!out.empty() && raw[i].t - raw[group_start].t < kHitMergeTolerance) {
      if (raw[i].face < out.back().face) {
        out.back() = raw[i];
      }
      continue;
    }
    if (out.size() == max_hits) {
      break;
    }
    group_start = i;
    out.push_back(raw[i]);
  }
  return out;
}

inline double naive_surface_distance(const TriangleMesh& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    if (mesh.face_valid(f)) {
      const auto [a, b, c] = mesh.triangle(f);
      best = std::min(best, (p - closest_point_on_triangle(p, a, b, c)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

inline double naive_p2s(const ColoredPointCloud& cloud, const TriangleMesh& mesh) {
  double sum = 0.0;
  for (const Vec3& p : cloud.points) {
    sum += naive_surface_distance(mesh, p);
  }
  return sum / static_cast<double>(cloud.size());
}

inline double naive_directional(const ColoredPointCloud& from, const ColoredPointCloud& to) {
  double sum = 0.0;
  for (const Vec3& p : from.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : to.points) {
      const double dx = p.x() - q.x();
      const double dy = p.y() - q.y();
      const double dz = p.z() - q.z();
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

inline double naive_chamfer(const ColoredPointCloud& a, const ColoredPointCloud& b) {
  return 0.5 * (naive_directional(a, b) + naive_directional(b, a));
}

inline ColoredPointCloud random_cloud(std::size_t count, std::uint64_t seed, double extent = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> position(-extent, extent);
  ColoredPointCloud cloud;
  for (std::size_t i = 0; i < count; ++i) {
    cloud.points.emplace_back(position(rng), position(rng), position(rng));
  }
  return cloud;
}

// Valid stack: per pixel a random number of sorted float depths in
// [0.5, 3.5], background after them.
inline PeeledMapStack random_stack(
    const PinholeCamera& camera,
    std::size_t layers,
    std::mt19937_64& rng,
    bool with_rgb = false,
    double fill = 0.8) {
  PeeledMapStack stack(camera, layers, with_rgb);
  std::uniform_real_distribution<double> depth(0.5, 3.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<float> values;
  for (std::uint32_t y = 0; y < camera.height(); ++y) {
    for (std::uint32_t x = 0; x < camera.width(); ++x) {
      values.clear();
      for (std::size_t l = 0; l < layers; ++l) {
        if (unit(rng) < fill) {
          values.push_back(static_cast<float>(depth(rng)));
        }
      }
      std::sort(values.begin(), values.end());
      for (std::size_t l = 0; l < values.size(); ++l) {
        stack.set_depth(l, y, x, values[l]);
      }
      if (with_rgb) {
        for (std::size_t l = 0; l < layers; ++l) {
          stack.set_rgb(
              l,
              y,
              x,
              {static_cast<float>(unit(rng)), static_cast<float>(unit(rng)), static_cast<float>(unit(rng))});
        }
      }
    }
  }
  return stack;
}

inline ResidualDeformationStack random_rd(
    const PinholeCamera& camera,
    std::size_t layers,
    std::mt19937_64& rng,
    double limit = kDefaultRdLimit) {
  ResidualDeformationStack rd(camera, layers);
  std::uniform_real_distribution<double> delta(-limit, limit);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::uint32_t y = 0; y < camera.height(); ++y) {
      for (std::uint32_t x = 0; x < camera.width(); ++x) {
        const bool valid = unit(rng) < 0.7;
        rd.set(l, y, x, delta(rng), valid);
      }
    }
  }
  return rd;
}

// Loss oracles: straight double loops over the accessor API.

inline std::vector<double> oracle_peel(const PeeledMapStack& a, const PeeledMapStack& b) {
  std::vector<double> out;
  for (std::size_t l = 0; l < a.layers(); ++l) {
    double sum = 0.0;
    for (std::uint32_t y = 0; y < a.height(); ++y) {
      for (std::uint32_t x = 0; x < a.width(); ++x) {
        sum += std::abs(static_cast<double>(a.depth(l, y, x)) - b.depth(l, y, x));
      }
    }
    out.push_back(sum / (a.width() * a.height()));
  }
  return out;
}

inline std::vector<double> oracle_rd(const ResidualDeformationStack& a, const ResidualDeformationStack& b) {
  std::vector<double> out;
  for (std::size_t l = 0; l < a.layers(); ++l) {
    double sum = 0.0;
    for (std::uint32_t y = 0; y < a.height(); ++y) {
      for (std::uint32_t x = 0; x < a.width(); ++x) {
        sum += std::abs(a.delta(l, y, x) - b.delta(l, y, x));
      }
    }
    out.push_back(sum / (a.width() * a.height()));
  }
  return out;
}

inline std::vector<double> oracle_smooth(
    const ResidualDeformationStack& pred,
    const ResidualDeformationStack& gt,
    const PeeledMapStack& smpl) {
  const int w = static_cast<int>(smpl.width());
  const int h = static_cast<int>(smpl.height());
  std::vector<double> out;
  for (std::size_t l = 0; l < smpl.layers(); ++l) {
    auto surface = [&](const ResidualDeformationStack& rd, int y, int x) {
      y = std::clamp(y, 0, h - 1);
      x = std::clamp(x, 0, w - 1);
      return rd.delta(l, y, x) + smpl.depth(l, y, x);
    };
    double sum = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double gx_gt = (surface(gt, y, x + 1) - surface(gt, y, x - 1)) / 2.0;
        const double gx_pred = (surface(pred, y, x + 1) - surface(pred, y, x - 1)) / 2.0;
        const double gy_gt = (surface(gt, y + 1, x) - surface(gt, y - 1, x)) / 2.0;
        const double gy_pred = (surface(pred, y + 1, x) - surface(pred, y - 1, x)) / 2.0;
        sum += std::abs(gx_gt - gx_pred) + std::abs(gy_gt - gy_pred);
      }
    }
    out.push_back(sum / (w * h));
  }
  return out;
}

inline std::vector<double> oracle_rgb(const PeeledMapStack& a, const PeeledMapStack& b) {
  std::vector<double> out(a.layers(), 0.0);
  for (std::size_t l = 1; l < a.layers(); ++l) {
    double sum = 0.0;
    for (std::uint32_t y = 0; y < a.height(); ++y) {
      for (std::uint32_t x = 0; x < a.width(); ++x) {
        for (int c = 0; c < 3; ++c) {
          sum += std::abs(static_cast<double>(a.rgb(l, y, x)[c]) - b.rgb(l, y, x)[c]);
        }
      }
    }
    out[l] = sum / (3.0 * a.width() * a.height());
  }
  return out;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
        ("peelkit_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const {
    return path_;
  }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

} // namespace peelkit::test
