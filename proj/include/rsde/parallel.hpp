#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rsde {

// Worker thread budget for ensemble loops. Results never depend on it: work is
// split into fixed-size chunks, each chunk writes its own slot, and callers
// merge slots in chunk order.
namespace detail {
inline std::atomic<unsigned>& thread_budget() {
    static std::atomic<unsigned> n{std::max(1u, std::thread::hardware_concurrency())};
    return n;
}
} // namespace detail

inline void set_thread_count(unsigned n) { detail::thread_budget().store(n ? n : 1); }
inline unsigned thread_count() { return detail::thread_budget().load(); }

// Runs fn(chunk_index, begin, end) over [0, n) in chunks of chunk_size.
// Chunks are claimed dynamically but identified by index, so any reduction
// keyed by chunk_index is schedule-independent.
inline void parallel_chunks(std::size_t n, std::size_t chunk_size,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0)
        return;
    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_count(), n_chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto body = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks || failed.load())
                return;
            try {
                fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
            } catch (...) {
                if (!failed.exchange(true))
                    error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(body);
    body();
    for (auto& t : pool)
        t.join();
    if (failed.load())
        std::rethrow_exception(error);
}

} // namespace rsde
