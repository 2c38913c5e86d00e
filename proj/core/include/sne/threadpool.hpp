#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sne {

// Runs fn(i) for i in [0, n). With threads <= 1 this degenerates to a plain
// loop, which is the bit-determinism mode the CLI guarantees. With more
// threads, callers are responsible for making fn(i) independent per index and
// for reducing any shared results in index order afterwards.
inline void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const int nworkers = static_cast<int>(std::min<std::int64_t>(threads, n));
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(nworkers));
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::mutex error_mu;
    for (int w = 0; w < nworkers; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(error_mu);
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace sne
