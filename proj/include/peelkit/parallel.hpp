#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace peelkit {

// 0 means "use every available core".
std::size_t resolve_threads(std::size_t requested) noexcept;

// Runs body(begin, end) over [0, count) split into chunks of at most `grain`
// items. Chunks are handed out dynamically, so bodies must only write to
// per-index output slots; results are then independent of the worker count.
// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(
    std::size_t count,
    std::size_t threads,
    std::size_t grain,
    const std::function<void(std::size_t begin, std::size_t end)>& body);

// Pairwise (tree) summation with a fixed split order.
double pairwise_sum(std::span<const double> values) noexcept;

} // namespace peelkit
