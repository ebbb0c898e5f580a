#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace phaseid {

// Resolve a worker-count knob: 0 means "use the hardware".
inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Run fn over [0,n) split into contiguous static chunks, one per worker.
// The partition depends only on (n, workers), and workers write disjoint
// outputs, so results are identical at every worker count.
inline void parallel_for_chunks(std::size_t n, unsigned workers,
                                const std::function<void(std::size_t, std::size_t)>& fn) {
    workers = resolve_workers(workers);
    if (n == 0) return;
    if (workers <= 1 || n < 2 * workers) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t begin = static_cast<std::size_t>(w) * chunk;
        if (begin >= n) break;
        std::size_t end = begin + chunk < n ? begin + chunk : n;
        threads.emplace_back(fn, begin, end);
    }
    for (auto& t : threads) t.join();
}

}  // namespace phaseid
