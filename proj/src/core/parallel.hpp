#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace kinetic {

/**
 * Runs fn(begin, end, chunk_index) over [0,n) split into contiguous chunks.
 *
 * Chunk boundaries depend only on (n, threads), and callers reduce per-chunk
 * partial results in chunk order, so results are deterministic at a fixed
 * thread count.
 */
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (threads < 1) threads = 1;
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(n, 1));
    if (nt <= 1 || n == 0) {
        fn(0, n, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t c = 0; c < nt; ++c) {
        const std::size_t b = c * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([=, &fn] { fn(b, e, c); });
    }
    for (auto& t : pool) t.join();
}

/// Deterministic parallel sum of term(i) over [0,n): chunk partials added in order.
inline double parallel_sum(std::size_t n, int threads, const std::function<double(std::size_t)>& term) {
    if (threads < 1) threads = 1;
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(n, 1));
    std::vector<double> partial(nt, 0.0);
    parallel_for(n, threads, [&](std::size_t b, std::size_t e, std::size_t c) {
        double acc = 0.0;
        for (std::size_t i = b; i < e; ++i) acc += term(i);
        partial[c] = acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

} // namespace kinetic
