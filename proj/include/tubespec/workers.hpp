#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace tubespec {

// TUBESPEC_WORKERS overrides the requested count; the result is at least 1.
inline int resolve_workers(int requested) {
    if (const char* env = std::getenv("TUBESPEC_WORKERS")) {
        try {
            requested = std::stoi(env);
        } catch (...) {
        }
    }
    return requested < 1 ? 1 : requested;
}

// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must be written to
// per-index slots by fn so that the caller's merge order does not depend on scheduling.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    const std::size_t n = std::min<std::size_t>(count, std::size_t(workers));
    for (std::size_t t = 0; t < n; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace tubespec
