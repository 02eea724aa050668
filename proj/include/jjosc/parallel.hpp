#pragma once

#include <cstddef>
#include <functional>

namespace jjosc {

/// Worker count for sweeps: hardware concurrency, capped by JJOSC_THREADS.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads. Each index is
/// visited exactly once; the first exception thrown is rethrown after all
/// workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace jjosc
