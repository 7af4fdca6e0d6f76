#pragma once

#include "peelkit/mesh.hpp"
#include "peelkit/point_cloud.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace peelkit {

// OBJ: `v x y z [r g b]` and `f` records (polygons are fan-triangulated,
// texture/normal indices ignored). PLY: ascii or binary little-endian on read,
// binary little-endian on write.

TriangleMesh parse_obj(std::string_view text);
std::string format_obj(const TriangleMesh& mesh);

TriangleMesh parse_ply_mesh(std::string_view bytes);
std::string format_ply_mesh(const TriangleMesh& mesh);

/// Vertices of any PLY; faces, if present, are ignored.
ColoredPointCloud parse_ply_points(std::string_view bytes);
/// Binary PLY with double x/y/z, uchar red/green/blue when colored, and a
/// ushort `layer` property when layer ids are present.
std::string format_ply_points(const ColoredPointCloud& cloud);

/// Dispatch on extension (.obj or .ply). Throw Error(Io) for unreadable files
/// and Error(Format) for malformed contents or unknown extensions.
TriangleMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh);

ColoredPointCloud read_point_cloud(const std::filesystem::path& path);
void write_point_cloud(const std::filesystem::path& path, const ColoredPointCloud& cloud);

} // namespace peelkit
