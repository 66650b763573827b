#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace hclab {

/// Worker count: hardware concurrency, capped by HCLAB_THREADS when set.
inline unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HCLAB_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (...) {
    }
  }
  return n;
}

namespace detail {

template <typename Body>
void run_chunks(std::size_t count, std::size_t chunks, Body&& body) {
  if (chunks <= 1) {
    body(std::size_t{0}, count, std::size_t{0});
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(chunks);
  const std::size_t step = (count + chunks - 1) / chunks;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = std::min(count, c * step);
    const std::size_t hi = std::min(count, lo + step);
    pool.emplace_back([&, lo, hi, c] {
      try {
        body(lo, hi, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::size_t chunk_count(std::size_t count, std::size_t min_chunk) {
  const std::size_t by_size = count / std::max<std::size_t>(1, min_chunk);
  return std::max<std::size_t>(1, std::min<std::size_t>(thread_budget(), by_size));
}

}  // namespace detail

/// Calls body(i) for every i in [0, count). Bodies must write disjoint state.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, std::size_t min_chunk = 256) {
  detail::run_chunks(count, detail::chunk_count(count, min_chunk),
                     [&](std::size_t lo, std::size_t hi, std::size_t) {
                       for (std::size_t i = lo; i < hi; ++i) body(i);
                     });
}

/// max over i of f(i); `init` for an empty range. NaN counts as +inf. max is
/// order independent, so the result does not depend on the thread budget.
template <typename F>
double parallel_max(std::size_t count, F&& f, double init, std::size_t min_chunk = 256) {
  const std::size_t chunks = detail::chunk_count(count, min_chunk);
  std::vector<double> partial(chunks, init);
  detail::run_chunks(count, chunks, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    double best = init;
    for (std::size_t i = lo; i < hi; ++i) {
      const double v = f(i);
      best = std::max(best, v == v ? v : std::numeric_limits<double>::infinity());
    }
    partial[c] = best;
  });
  return *std::max_element(partial.begin(), partial.end());
}

}  // namespace hclab
