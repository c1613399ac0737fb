#ifndef GRIDMOP_PARALLEL_HPP_
#define GRIDMOP_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace gridmop {

/// Number of workers for parallel maps: the GRIDMOP_WORKERS environment
/// variable when set to a positive integer, otherwise the hardware
/// concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("GRIDMOP_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Calls fn(i) for every i in [0, n). Each index must touch only its own
/// state so that results do not depend on the worker count or schedule.
/// The first exception thrown by any worker is rethrown on the caller.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
    if (n <= 0) return;
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(body);
    body();
    for (auto& thread : pool) thread.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace gridmop

#endif  // GRIDMOP_PARALLEL_HPP_
