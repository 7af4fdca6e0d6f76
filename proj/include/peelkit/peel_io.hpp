#pragma once

#include "peelkit/fusion.hpp"
#include "peelkit/peeled_map.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace peelkit {

// PEEL container, little-endian:
//   "PEEL" | u8 version (1) | u8 flags | u16 layers | u32 width | u32 height
//   | float32 grid, layers x height x width, row-major, layer by layer
//   | float32 RGB grid (3 interleaved channels per pixel) if flags bit 0
//   | validity bitmap if flags bit 1, one bit per grid cell, LSB first,
//     zero-padded to a whole byte
// With flags bit 1 the float32 grid holds signed residual offsets instead of
// depths. The camera lives in a JSON sidecar next to the container.

inline constexpr std::uint8_t kPeelVersion = 1;
inline constexpr std::uint8_t kPeelFlagRgb = 0x01;
inline constexpr std::uint8_t kPeelFlagResidual = 0x02;
inline constexpr std::size_t kPeelHeaderSize = 16;

struct PeelHeader {
  std::uint8_t version = kPeelVersion;
  std::uint8_t flags = 0;
  std::uint16_t layers = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

/// Throws Error(Format) for bad magic, unknown version or flag bits.
PeelHeader parse_peel_header(std::string_view bytes);

std::string serialize_peel(const PeeledMapStack& stack);
std::string serialize_rd(const ResidualDeformationStack& rd);

/// The header must agree with the camera's image size and the payload size
/// must match exactly; otherwise Error(Format).
PeeledMapStack deserialize_peel(std::string_view bytes, const PinholeCamera& camera);
ResidualDeformationStack deserialize_rd(std::string_view bytes, const PinholeCamera& camera);

/// {"fx", "fy", "cx", "cy", "width", "height", "world_to_camera"} with the
/// pose as four rows of four numbers.
std::string format_camera_json(const PinholeCamera& camera);
/// Accepts the pose as nested rows or 16 row-major numbers. Malformed JSON
/// or missing keys raise Error(Format); impossible intrinsics raise
/// Error(InvalidArgument).
PinholeCamera parse_camera_json(std::string_view text);

PinholeCamera read_camera(const std::filesystem::path& path);
void write_camera(const std::filesystem::path& path, const PinholeCamera& camera);

/// "<dir>/<stem>.camera.json" for "<dir>/<stem>.peel".
std::filesystem::path camera_sidecar_path(const std::filesystem::path& peel_path);

/// Container plus camera sidecar, each written atomically.
void write_peel(const std::filesystem::path& path, const PeeledMapStack& stack);
void write_rd(const std::filesystem::path& path, const ResidualDeformationStack& rd);
PeeledMapStack read_peel(const std::filesystem::path& path);
ResidualDeformationStack read_rd(const std::filesystem::path& path);

/// Writes "<prefix>_layer<i>.png" per depth layer (i from 1) as 16-bit grayscale, with
/// [min_depth, max_depth] mapped linearly onto [1, 65535] and background at
/// 0. Visualization only. Returns the written paths.
std::vector<std::filesystem::path> export_depth_png(
    const PeeledMapStack& stack,
    const std::filesystem::path& prefix,
    double min_depth,
    double max_depth);

} // namespace peelkit
