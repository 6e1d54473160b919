#pragma once

#include <cstdint>
#include <functional>

namespace wsireg {

// Bounds the worker count for all parallel loops. 0 restores the hardware
// default. Loops write results by index, so thread count never changes
// numerical output.
void set_threads(int n);
int thread_count();

// Runs fn(begin, end) over disjoint chunks of [0, n).
void parallel_for_chunks(std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& fn);

// Convenience per-index form.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace wsireg
