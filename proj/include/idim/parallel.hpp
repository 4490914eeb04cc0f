#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace idim {

// Thread count: IDIM_THREADS env var if set, else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("IDIM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Static block partition; each index is processed exactly once and results
// must be written to preassigned slots so the outcome is independent of the
// thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned threads = thread_count();
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const unsigned used = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(used);
    for (unsigned t = 0; t < used; ++t) {
        pool.emplace_back([&, t] {
            const std::size_t lo = n * t / used;
            const std::size_t hi = n * (t + 1) / used;
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace idim
