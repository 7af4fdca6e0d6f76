#pragma once

#include "peelkit/mesh.hpp"
#include "peelkit/peeled_map.hpp"
#include "peelkit/point_cloud.hpp"

#include <cstddef>
#include <cstdint>

namespace peelkit {

/// Traces one ray through each pixel center and stores the camera-space
/// z-depth of the i-th crossing in layer i. RGB layers (present when the mesh
/// has vertex colors) hold the barycentric blend of the hit face's colors.
/// Missing crossings leave background zeros. Output is identical for every
/// thread count. Throws Error(EmptyMesh) and Error(InvalidArgument).
PeeledMapStack encode_peeled(
    const TriangleMesh& mesh,
    const PinholeCamera& camera,
    std::size_t layers = kDefaultLayers,
    std::size_t threads = 0);

/// Back-projects every nonzero depth to world space, layer by layer in row
/// order, copying colors when the stack carries RGB.
ColoredPointCloud decode_pointcloud(const PeeledMapStack& stack);

/// Returns the cloud unchanged if it has at most `target` points, otherwise
/// `target` distinct points chosen by a generator seeded with `seed`, kept in
/// their original order.
ColoredPointCloud subsample_uniform(const ColoredPointCloud& cloud, std::size_t target, std::uint64_t seed);

} // namespace peelkit
