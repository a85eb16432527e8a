#pragma once

#include <cstddef>
#include <functional>

namespace cohesim {

/// Worker count for internal loops: COHESIM_THREADS if set and positive,
/// otherwise the hardware concurrency (at least 1).
unsigned thread_count();
/// Same without the process-wide limit.
unsigned base_thread_count();
/// Process-wide cap on thread_count() (0 removes it). Set by --jobs.
void set_thread_limit(unsigned limit);

/// Splits [0, n) into contiguous chunks, one per worker, and calls
/// fn(chunk, begin, end) for each. Chunk boundaries depend only on n and
/// the worker count, so results merged in chunk order are deterministic.
void parallel_chunks(std::size_t n, unsigned workers,
                     const std::function<void(unsigned, std::size_t, std::size_t)>& fn);

}  // namespace cohesim
