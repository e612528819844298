#pragma once

#include <cstddef>
#include <functional>

namespace mde {

/// Worker count, capped by the MDE_THREADS environment variable (default:
/// hardware concurrency).
std::size_t thread_count();

/// Runs body(i) for i in [0, count). Each index is visited exactly once and
/// writes only its own output slot, so results do not depend on the number
/// of threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mde
