#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace evosts {

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
///
/// Work item i is fully determined by i, so results are identical for any
/// thread count; callers must write results into per-index slots. The first
/// exception thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (count == 0) return;
    std::size_t workers = threads < 1 ? 1 : static_cast<std::size_t>(threads);
    if (workers > count) workers = count;

    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace evosts
