#include "peelkit/parallel.hpp"
#include "peelkit/error.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace peelkit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyMesh:
      return "EmptyMesh";
    case ErrorKind::EmptyCloud:
      return "EmptyCloud";
    case ErrorKind::InvalidMesh:
      return "InvalidMesh";
    case ErrorKind::InvalidArgument:
      return "InvalidArgument";
    case ErrorKind::DimensionMismatch:
      return "DimensionMismatch";
    case ErrorKind::MissingRgb:
      return "MissingRgb";
    case ErrorKind::Io:
      return "Io";
    case ErrorKind::Format:
      return "Format";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

std::size_t resolve_threads(std::size_t requested) noexcept {
  if (requested > 0) {
    return requested;
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(
    std::size_t count,
    std::size_t threads,
    std::size_t grain,
    const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) {
    return;
  }
  grain = std::max<std::size_t>(1, grain);
  const std::size_t chunks = (count + grain - 1) / grain;
  const std::size_t workers = std::min(resolve_threads(threads), chunks);
  if (workers <= 1) {
    body(0, count);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&]() {
    for (;;) {
      const std::size_t chunk = next.fetch_add(1, std::memory_order_relaxed);
      if (chunk >= chunks) {
        return;
      }
      const std::size_t begin = chunk * grain;
      const std::size_t end = std::min(count, begin + grain);
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next.store(chunks, std::memory_order_relaxed);
        return;
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t i = 1; i < workers; ++i) {
      pool.emplace_back(run);
    }
    run();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

double pairwise_sum(std::span<const double> values) noexcept {
  constexpr std::size_t kBlock = 32;
  if (values.size() <= kBlock) {
    double sum = 0.0;
    for (double v : values) {
      sum += v;
    }
    return sum;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

} // namespace peelkit
