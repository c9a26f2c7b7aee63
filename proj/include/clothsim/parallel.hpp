#pragma once

#include <functional>

namespace clothsim {

/// Worker count from the CLOTHSIM_THREADS environment variable;
/// 0 or unset selects the hardware concurrency.
int worker_count_from_env();

/// Runs fn(i) for i in [0, n). threads <= 1 runs inline. Each index is
/// processed by exactly one thread, so per-index writes stay deterministic.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace clothsim
