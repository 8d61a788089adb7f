#pragma once

#include <cstddef>
#include <functional>

namespace lapdmd {

/// Worker count: LAPDMD_THREADS when set to a positive integer, otherwise
/// the hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Indices are handed out in contiguous
/// blocks; the body must only write state owned by index i. If several
/// indices throw, the exception of the lowest index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lapdmd
