#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace tubelab {

// Chunked parallel_for. Results must be per-index writes or commutative
// integer merges so that the thread count never changes any output bit.
// Floating-point reductions are summed sequentially by the callers.
template <typename Fn>
void parallel_for(int64_t n, int threads, Fn&& fn) {
    if (n <= 0) return;
    if (threads <= 1 || n < 256) {
        for (int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    int workers = std::min<int64_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<int64_t> cursor{0};
    const int64_t block = std::max<int64_t>(1, n / (workers * 8));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                int64_t lo = cursor.fetch_add(block);
                if (lo >= n) break;
                int64_t hi = std::min(n, lo + block);
                for (int64_t i = lo; i < hi; ++i) fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace tubelab
