#pragma once

// Minimal index-parallel loop used by the sweep modules. Results must be
// written by index so the output order never depends on scheduling; the
// UJM_WORKERS environment variable caps the worker count.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ujm {

inline unsigned resolve_workers(unsigned requested = 0) {
    unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("UJM_WORKERS")) {
        char* end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap >= 1) n = std::min<unsigned long>(n, cap);
    }
    return n;
}

// Runs fn(i) for i in [0, n). The first exception (by lowest index) is
// rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned requested_workers = 0) {
    const unsigned workers = std::min<std::size_t>(resolve_workers(requested_workers), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace ujm
