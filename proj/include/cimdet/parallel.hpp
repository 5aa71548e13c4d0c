#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cimdet {

// Runs f(i) for i in [0, n) on up to `workers` threads. Each index is
// processed exactly once and f must write its result into an index-addressed
// slot, so the outcome is identical for every worker count.
template <class F>
void parallel_for(long n, int workers, F&& f) {
    if (n <= 0) return;
    if (workers < 1) workers = 1;
    if (workers == 1 || n == 1) {
        for (long i = 0; i < n; ++i) f(i);
        return;
    }
    const int nthreads = static_cast<int>(std::min<long>(workers, n));
    std::atomic<long> next{0};
    std::mutex err_mutex;
    std::exception_ptr error;

    auto body = [&] {
        for (;;) {
            const long i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace cimdet
