#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rebirthlab {

// Workers used by parallel_map: the runtime override (set by the determinism
// check), else REBIRTHLAB_WORKERS, else the hardware count.
int worker_count();
void set_worker_override(int n);  // 0 clears

// Evaluates fn(0..n-1) on a worker pool and returns the results in index
// order. Each replica derives its own random stream from its index, so the
// outcome is identical for any worker count; merging happens in index order
// on the caller side.
template <class R>
std::vector<R> parallel_map(int n, const std::function<R(int)>& fn) {
    std::vector<R> results(static_cast<std::size_t>(n));
    const int workers = std::max(1, std::min(worker_count(), n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) results[static_cast<std::size_t>(i)] = fn(i);
        return results;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    results[static_cast<std::size_t>(i)] = fn(i);
                } catch (const std::exception& e) {
                    std::lock_guard lock(error_mutex);
                    error = e.what();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("parallel_map worker failed: " + error);
    return results;
}

}  // namespace rebirthlab
