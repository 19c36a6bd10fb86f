#pragma once

#include <cstddef>
#include <functional>

namespace wavespeed {

/// Logical core count, at least 1.
unsigned default_jobs();

/// Calls fn(i) for every i in [0, count) on up to `jobs` threads. Each index
/// runs exactly once; if any call throws, the exception of the lowest failing
/// index is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace wavespeed
