#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace sflow {

/// Runs body(i) for i in [0, n) on OpenMP threads when `enabled`, serially
/// otherwise. The first exception thrown by any iteration is rethrown.
template <typename Body>
void parallel_for(std::size_t n, bool enabled, int threads, Body&& body) {
  if (!enabled || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex guard;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace sflow
