#ifndef KHJ_PARALLEL_HPP
#define KHJ_PARALLEL_HPP

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace khj {

// Worker count: hardware default, capped by the KHJ_THREADS environment
// variable (0 or unset = hardware default) and by the explicit request.
inline unsigned worker_count(unsigned requested = 0) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0)
        hw = 1;
    unsigned n = requested == 0 ? hw : requested;
    if (const char* env = std::getenv("KHJ_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap > 0 && static_cast<unsigned>(cap) < n)
            n = static_cast<unsigned>(cap);
    }
    return n == 0 ? 1 : n;
}

// Parallel map over [0, count). Tasks must write to disjoint state; any
// reductions happen after the join, in index order, so results do not depend
// on the number of workers.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
    unsigned n = worker_count(threads);
    if (n <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    n = static_cast<unsigned>(std::min<std::size_t>(n, count));
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t)
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < count; i += n)
                fn(i);
        });
    for (auto& th : pool)
        th.join();
}

} // namespace khj

#endif
