#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <vector>

#ifdef GMIX_HAVE_OPENMP
#include <omp.h>
#endif

namespace gmix {

/// How replicate loops are executed. Results never depend on the choice:
/// every replicate draws from its own RngStream and writes to its own slot,
/// and reductions run serially afterwards.
struct ExecPolicy {
  enum class Mode { serial, parallel };
  Mode mode = Mode::parallel;
  /// Worker count for parallel mode; 0 lets the runtime decide.
  int threads = 0;

  static ExecPolicy serial() { return {Mode::serial, 1}; }
  static ExecPolicy parallel(int threads = 0) { return {Mode::parallel, threads}; }
};

/// Runs body(i) for i in [0, count). The first exception thrown by any
/// iteration is rethrown on the calling thread once the loop has finished.
template <class Body>
void for_each_replicate(const ExecPolicy& policy, std::size_t count, Body&& body) {
  if (policy.mode == ExecPolicy::Mode::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
#ifdef GMIX_HAVE_OPENMP
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const int threads = policy.threads > 0 ? policy.threads : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
#else
  for (std::size_t i = 0; i < count; ++i) body(i);
#endif
}

/// Runs body(i, counts) for i in [0, count), where `counts` is a
/// worker-local array of `width` integers, and returns the elementwise sum of
/// all worker arrays. Integer addition makes the result independent of how
/// iterations were distributed.
template <class Body>
std::vector<std::uint64_t> count_replicates(const ExecPolicy& policy, std::size_t count, std::size_t width,
                                            Body&& body) {
  std::vector<std::uint64_t> total(width, 0);
  if (policy.mode == ExecPolicy::Mode::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i, std::span<std::uint64_t>(total));
    return total;
  }
#ifdef GMIX_HAVE_OPENMP
  std::exception_ptr failure;
  std::mutex mutex;
  const int threads = policy.threads > 0 ? policy.threads : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel num_threads(threads)
  {
    std::vector<std::uint64_t> local(width, 0);
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i), std::span<std::uint64_t>(local));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    }
    std::lock_guard<std::mutex> lock(mutex);
    for (std::size_t j = 0; j < width; ++j) total[j] += local[j];
  }
  if (failure) std::rethrow_exception(failure);
#else
  for (std::size_t i = 0; i < count; ++i) body(i, std::span<std::uint64_t>(total));
#endif
  return total;
}

}  // namespace gmix
