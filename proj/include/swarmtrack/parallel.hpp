#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace swarmtrack {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items must
/// not mutate shared state. The first exception thrown by any item is
/// rethrown on the calling thread after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> pool;
    pool.reserve(n_threads - 1);
    for (std::size_t t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Worker count from the environment override, or the given default.
int resolve_workers(int requested);

}  // namespace swarmtrack
