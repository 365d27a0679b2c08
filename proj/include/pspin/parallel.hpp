#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace pspin::parallel {

inline std::atomic<int>& worker_slot() {
    static std::atomic<int> w{1};
    return w;
}

inline void set_workers(int w) { worker_slot().store(w < 1 ? 1 : w); }
inline int workers() { return worker_slot().load(); }

// Static range partition. Bodies must write to disjoint state indexed by i;
// under that contract the result is identical for any worker count.
template <class F>
void for_range(std::size_t begin, std::size_t end, F&& body) {
    const std::size_t count = end > begin ? end - begin : 0;
    const int w = workers();
    if (w <= 1 || count < 2048) {
        for (std::size_t i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    const std::size_t chunk = (count + static_cast<std::size_t>(w) - 1) / static_cast<std::size_t>(w);
    for (int t = 0; t < w; ++t) {
        const std::size_t lo = begin + chunk * static_cast<std::size_t>(t);
        const std::size_t hi = lo + chunk < end ? lo + chunk : end;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline constexpr std::size_t reduce_block = 256;

// Fixed-shape pairwise reduction: the summation tree depends only on the
// range, never on the worker count, so float results are bit-stable.
template <class F>
double pairwise_sum(std::size_t begin, std::size_t end, const F& term) {
    const std::size_t count = end - begin;
    if (count <= reduce_block) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += term(i);
        return s;
    }
    std::size_t half = reduce_block;
    while (half * 2 < count) half *= 2;
    return pairwise_sum(begin, begin + half, term) + pairwise_sum(begin + half, end, term);
}

// Same tree, with the leaf blocks evaluated in parallel.
template <class F>
double pairwise_sum_parallel(std::size_t begin, std::size_t end, const F& term) {
    const std::size_t count = end > begin ? end - begin : 0;
    if (count == 0) return 0.0;
    const std::size_t nblocks = (count + reduce_block - 1) / reduce_block;
    if (workers() <= 1 || nblocks < 8) return pairwise_sum(begin, end, term);
    std::vector<double> block(nblocks);
    for_range(0, nblocks, [&](std::size_t b) {
        const std::size_t lo = begin + b * reduce_block;
        const std::size_t hi = lo + reduce_block < end ? lo + reduce_block : end;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        block[b] = s;
    });
    // combine block sums with the same fixed tree
    const std::function<double(std::size_t, std::size_t)> tree = [&](std::size_t lo, std::size_t hi) -> double {
        if (hi - lo == 1) return block[lo];
        std::size_t half = 1;
        while (half * 2 < hi - lo) half *= 2;
        return tree(lo, lo + half) + tree(lo + half, hi);
    };
    return tree(0, nblocks);
}

} // namespace pspin::parallel
