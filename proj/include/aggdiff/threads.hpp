// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace aggdiff {

/// Worker-count cap shared by all parallel loops (0 = hardware concurrency).
inline std::atomic<int>& thread_cap()
{
    static std::atomic<int> cap{0};
    return cap;
}

inline int effective_threads()
{
    int cap = thread_cap().load();
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0)
        hw = 1;
    return cap > 0 ? std::min(cap, hw) : hw;
}

/// Chunked parallel reduction over [0, n). Chunk results are accumulated in
/// index order so that the sum is independent of thread scheduling.
template<class ChunkFn>
double parallel_sum(std::size_t n, ChunkFn&& fn)
{
    int const workers = effective_threads();
    if (n == 0)
        return 0.0;
    if (workers <= 1 || n < 1024) {
        return fn(std::size_t{0}, n);
    }
    std::size_t const chunks = std::min<std::size_t>(static_cast<std::size_t>(workers) * 4, n);
    std::size_t const step = (n + chunks - 1) / chunks;
    std::vector<double> partial(chunks, 0.0);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t const c = next.fetch_add(1);
                if (c >= chunks)
                    return;
                std::size_t const lo = c * step;
                std::size_t const hi = std::min(n, lo + step);
                if (lo < hi)
                    partial[c] = fn(lo, hi);
            }
        });
    }
    for (auto& th : pool)
        th.join();
    double total = 0;
    for (double p : partial)
        total += p;
    return total;
}

/// Parallel for over [0, n) with no reduction.
template<class Fn>
void parallel_for(std::size_t n, Fn&& fn)
{
    int const workers = effective_threads();
    if (n == 0)
        return;
    if (workers <= 1 || n < 256) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t const i = next.fetch_add(1);
                if (i >= n)
                    return;
                fn(i);
            }
        });
    }
    for (auto& th : pool)
        th.join();
}

}  // namespace aggdiff
