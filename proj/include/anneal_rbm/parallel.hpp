#pragma once

#include <cstddef>
#include <functional>

namespace anneal_rbm {

/// Worker count: ANNEAL_RBM_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index is executed exactly once; callers
/// write results into pre-sized slots so the merge order is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace anneal_rbm
