#pragma once

// Deterministic parallel map over an index range.  Results are collected
// per index, so the merged output is independent of scheduling.
// SNAPBACK_THREADS caps the worker count.

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace snapback {

inline int worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 1 : static_cast<int>(hw);
    if (n > 8) n = 8;
    if (const char* env = std::getenv("SNAPBACK_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

template <typename Fn>
void parallel_for(long n, Fn&& body) {
    int workers = worker_count();
    if (workers <= 1 || n < 16) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<long> next{0};
    auto run = [&] {
        for (;;) {
            long i = next.fetch_add(1);
            if (i >= n) break;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers - 1));
    for (int t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

}  // namespace snapback
