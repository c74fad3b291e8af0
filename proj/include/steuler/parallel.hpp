#pragma once

#include <cstddef>
#include <functional>

namespace steuler {

/// Worker thread cap. Initialised from SOLVER_THREADS (0 or unset = hardware
/// concurrency); set_thread_count overrides it for the whole process.
int thread_count();
void set_thread_count(int n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Every index is
/// visited exactly once; results must not depend on the chunking.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace steuler
