#pragma once

// Fixed-partition parallel loops. Work is split into contiguous blocks whose
// boundaries depend only on the problem size, and partial results are reduced
// in block order, so outputs do not depend on the worker count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace carnot::par {

inline constexpr std::size_t kBlocks = 64;

/// Runs body(block, begin, end) for each block of [0, n).
template <class Body>
void for_blocks(std::size_t n, int workers, Body&& body) {
    const std::size_t blocks = std::min<std::size_t>(kBlocks, std::max<std::size_t>(1, n));
    auto run_block = [&](std::size_t b) {
        const std::size_t lo = n * b / blocks, hi = n * (b + 1) / blocks;
        body(b, lo, hi);
    };
    if (workers <= 1 || blocks == 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t b = w; b < blocks; b += workers) run_block(b);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Sum of f(i) over [0, n), reduced in fixed block order.
template <class F>
double sum(std::size_t n, int workers, F&& f) {
    std::vector<double> partial(kBlocks, 0.0);
    for_blocks(n, workers, [&](std::size_t b, std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += f(i);
        partial[b] = acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

} // namespace carnot::par
