#pragma once

#include <cstddef>
#include <functional>

namespace chronoreg {

// Number of worker threads used by parallel_for. Default 1 (fully serial).
void set_worker_count(int workers);
int worker_count();

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot so that results do not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace chronoreg
