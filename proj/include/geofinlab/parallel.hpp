// Minimal deterministic work partitioning.
//
// parallel_for splits [0, n) into contiguous chunks, one worker thread per
// chunk.  Callers must make iteration i's result independent of which thread
// runs it (our random streams are keyed by index, and results land in
// preallocated slots), so output is identical for every thread count.

#pragma once

#include <algorithm>
#include <cstdlib>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace geofinlab {

// Thread count resolution: explicit request > GEOFINLAB_THREADS > hardware.
inline int resolve_threads(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GEOFINLAB_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(std::min(hw, 16u));
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& body) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::size_t nthreads = std::min<std::size_t>(std::size_t(threads), n);
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::exception_ptr first_error = nullptr;
    std::mutex error_lock;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(error_lock);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace geofinlab
