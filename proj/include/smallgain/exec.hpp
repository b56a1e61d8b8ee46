#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace smallgain {

/// Selects the serial reference loop or the OpenMP loop for a grid kernel.
/// Both run the same per-index body and write results by index, so their
/// outputs are identical.
enum class Execution { serial, parallel };

void set_thread_count(int threads);
int thread_count();

template <class Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  // Exceptions may not cross the OpenMP region boundary; rethrow the first.
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace smallgain
