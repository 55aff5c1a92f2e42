#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace ftlab::detail {

inline unsigned default_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1u : hc;
}

// Runs f(i) for i in [0, n) over a chunked worker pool. Callers write
// results into per-index slots, so the outcome does not depend on
// scheduling.
template <class F>
void parallel_for(std::size_t n, F&& f, unsigned n_threads) {
    if (n == 0) return;
    n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(n)));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    const std::size_t chunk = (n + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (std::size_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace ftlab::detail
