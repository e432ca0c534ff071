#pragma once

#include <functional>

namespace steklov {

// Worker cap for the embarrassingly parallel fill loops. 0 means hardware
// concurrency. Results are written to disjoint slots, so the outputs are
// bitwise independent of the thread count.
void set_max_threads(int n);
int max_threads();

// chunked parallel loop over [0, count)
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace steklov
