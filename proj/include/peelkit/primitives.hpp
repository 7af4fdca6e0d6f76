#pragma once

#include "peelkit/mesh.hpp"

#include <cstdint>

namespace peelkit {

// Closed and open test surfaces with outward winding (counter-clockwise seen
// from outside).

/// Subdivided icosahedron: 20 * 4^subdivisions faces.
TriangleMesh make_icosphere(int subdivisions, double radius = 1.0, const Vec3& center = Vec3::Zero());

/// Latitude/longitude sphere with poles on the y axis. With `upper_only` the
/// mesh stops at the equator (stacks must then be even) and is open there.
TriangleMesh make_uv_sphere(
    int stacks,
    int slices,
    double radius = 1.0,
    const Vec3& center = Vec3::Zero(),
    bool upper_only = false);

/// Axis-aligned box, two triangles per side.
TriangleMesh make_box(const Vec3& center, const Vec3& half_extents);

/// Square in the plane z = depth, facing the origin.
TriangleMesh make_quad(double depth, double half_size, const Vec3& center_xy = Vec3::Zero());

/// Torus around the y axis.
TriangleMesh make_torus(
    double major_radius,
    double minor_radius,
    int rings,
    int sides,
    const Vec3& center = Vec3::Zero());

/// Assigns each vertex a color derived from its normalized position, so
/// interpolated colors vary smoothly across the surface.
TriangleMesh with_position_colors(const TriangleMesh& mesh);

} // namespace peelkit
