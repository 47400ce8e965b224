#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace implink {

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Runs fn(i) for i in [0, n). Work is handed out in chunks through an atomic
// cursor, so callers must write results into per-index slots (or other
// commutative accumulators) to stay deterministic across worker counts.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t chunk = std::max<std::size_t>(1, n / (workers * 16));
    std::atomic<std::size_t> cursor{0};
    auto body = [&]() {
        for (;;) {
            const std::size_t begin = cursor.fetch_add(chunk);
            if (begin >= n) return;
            const std::size_t end = std::min(n, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

// Static partition variant: fn(worker_id, begin, end). Use when each worker
// owns scratch state; merge worker results in worker-id order.
template <class Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (n == 0) return;
    if (workers > n) workers = static_cast<unsigned>(n);
    if (workers <= 1) {
        fn(0u, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t base = n / workers;
    const std::size_t extra = n % workers;
    std::size_t begin = 0;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t len = base + (w < extra ? 1 : 0);
        const std::size_t end = begin + len;
        pool.emplace_back([&fn, w, begin, end]() { fn(w, begin, end); });
        begin = end;
    }
    for (auto& t : pool) t.join();
}

}  // namespace implink
