#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace stpca {

/// Worker count from STPCA_THREADS: unset -> hardware concurrency,
/// "0" or "1" -> sequential. Invalid values fall back to sequential.
unsigned configured_threads();

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = sequential).
/// Indices are claimed in order; the first exception by index is rethrown
/// after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace stpca
