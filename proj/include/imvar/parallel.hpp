#pragma once

#include <cstddef>
#include <functional>

namespace imvar {

/// Hardware concurrency, at least 1.
unsigned default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work items
/// must not share mutable state; the first exception thrown is rethrown
/// after all workers join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace imvar
