#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace iotguard {

// Every data-parallel kernel takes one of these. The serial path is the
// reference the parallel one is tested against; both must produce
// identical results.
enum class Exec { serial, parallel };

// Runs fn(i) for i in [0, n). Work items must write only to their own
// slots. The first exception thrown by any item is rethrown after the loop.
template <typename Fn>
void for_each_index(Exec exec, std::size_t n, Fn&& fn) {
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace iotguard
