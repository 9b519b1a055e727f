#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>

namespace plottwist {

/// Runs body(i) for i in [0, n) on up to `jobs` OpenMP threads. Exceptions
/// cannot cross an OpenMP region, so the first one thrown is captured and
/// rethrown after the loop; remaining iterations still run.
template <class Body>
void parallel_for(std::size_t n, int jobs, Body&& body) {
  std::exception_ptr first;
  std::mutex mutex;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(mutex);
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace plottwist
