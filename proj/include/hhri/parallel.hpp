#pragma once
#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hhri {

/// Global worker count used by parallel_for. Set from the CLI --threads flag.
namespace detail {
inline std::atomic<int>& thread_count() {
    static std::atomic<int> n{static_cast<int>(std::thread::hardware_concurrency())};
    return n;
}
} // namespace detail

inline void set_num_threads(int n) { detail::thread_count() = n > 0 ? n : 1; }
inline int num_threads() { return std::max(1, detail::thread_count().load()); }

/// Runs fn(i) for i in [0, n). Work is claimed in chunks through a shared
/// counter; results must be written to per-index slots so the outcome is
/// independent of scheduling. The first exception thrown by any worker is
/// rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t chunk = 16) {
    const int workers = num_threads();
    if (workers <= 1 || n < 2 * chunk) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            const std::size_t end = std::min(n, begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace hhri
