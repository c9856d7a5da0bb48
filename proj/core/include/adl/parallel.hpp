#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

namespace adl {

// Worker-pool size. Defaults to the ADL_THREADS environment variable, falling
// back to the hardware concurrency (capped at 8). set_thread_override(0)
// restores the default.
int thread_count();
void set_thread_override(int n);

// Runs f(i) for i in [0, n). Work is split into contiguous blocks; f must
// write results by index so the outcome is independent of the thread count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& f);

// Deterministic chunked reduction: indices are processed in fixed chunks of
// `chunk` (each chunk sequential, chunks merged in index order), so floating
// point accumulation is bitwise identical for any thread count.
// accumulate(chunk_state, i) folds one index; merge(total, chunk_state) folds
// a finished chunk into the running total, in chunk order.
template <class State>
void chunked_reduce(std::int64_t n, std::int64_t chunk,
                    const std::function<void(State&, std::int64_t)>& accumulate,
                    const std::function<void(State&, const State&)>& merge, State& total) {
  std::int64_t nchunks = (n + chunk - 1) / chunk;
  std::vector<State> partial(static_cast<std::size_t>(nchunks));
  parallel_for(nchunks, [&](std::int64_t c) {
    std::int64_t lo = c * chunk;
    std::int64_t hi = std::min(n, lo + chunk);
    for (std::int64_t i = lo; i < hi; ++i) accumulate(partial[static_cast<std::size_t>(c)], i);
  });
  for (std::int64_t c = 0; c < nchunks; ++c) merge(total, partial[static_cast<std::size_t>(c)]);
}

}  // namespace adl
