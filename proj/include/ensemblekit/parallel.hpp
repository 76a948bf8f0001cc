#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

namespace ensemblekit {

// Selects between the OpenMP kernel and its serial reference. Both produce
// bit-identical results: parallel loops only ever split independent
// iterations and never reorder a floating-point reduction.
enum class ExecPolicy { serial, parallel };

// Calls body(i) for i in [0, n). Under ExecPolicy::parallel the iterations
// are distributed with OpenMP; the first exception thrown by any iteration is
// rethrown on the calling thread.
template <class Body>
void for_each_index(std::size_t n, ExecPolicy policy, Body&& body) {
  if (policy == ExecPolicy::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// Number of threads an OpenMP parallel region would use right now.
int max_threads();

}  // namespace ensemblekit
