#pragma once

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace raresim {

// Index-parallel loop. Results must be written to disjoint slots so the
// outcome is independent of scheduling. Set RARESIM_THREADS=1 to force
// serial execution.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    unsigned workers = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("RARESIM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) workers = static_cast<unsigned>(v);
    }
    if (workers <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace raresim
