#ifndef BOSE_EXPAND_PARALLEL_HPP
#define BOSE_EXPAND_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace bose_expand {

/// Worker count from BOSE_EXPAND_WORKERS, falling back to the hardware concurrency.
inline int default_workers() {
    if (const char* env = std::getenv("BOSE_EXPAND_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on at most `workers` threads. Results must be written to per-index
/// slots so the outcome does not depend on scheduling; the lowest-index exception is rethrown.
template <class F>
void parallel_for(std::size_t n, int workers, F&& fn) {
    const auto threads = static_cast<std::size_t>(std::clamp<long>(workers, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace bose_expand

#endif
