#pragma once

#include <cstddef>
#include <functional>

namespace gfpk {

/// Worker count used by parallel node loops (>= 1). Results never depend on it.
void set_thread_count(int threads);
int thread_count();

/// Runs body(begin, end) over disjoint chunks of [0, n).
void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body);

}  // namespace gfpk
