#pragma once

#include <atomic>
#include <cstdlib>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace dfr {

// Number of data-parallel workers: hardware concurrency, capped by DFR_THREADS.
inline std::size_t worker_count() {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("DFR_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1 && static_cast<std::size_t>(cap) < n)
            n = static_cast<std::size_t>(cap);
    }
    return n;
}

// Runs body(chunk_index, begin, end) over [0, total) in fixed chunks.
// Chunk boundaries never depend on the worker count, so per-chunk results
// reduced in chunk order give run-to-run identical sums for any DFR_THREADS.
inline void parallel_chunks(std::size_t total, std::size_t chunk_size,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    if (total == 0) return;
    const std::size_t nchunks = (total + chunk_size - 1) / chunk_size;
    const std::size_t workers = std::min(worker_count(), nchunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c)
            body(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            body(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 0; t + 1 < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

}  // namespace dfr
