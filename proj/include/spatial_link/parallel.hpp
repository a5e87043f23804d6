#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spatial_link {

// Thread count from an explicit request, then SPATIAL_LINK_THREADS, then the
// hardware. Always >= 1.
unsigned resolve_threads(unsigned requested);

// Splits [0, n) into `threads` contiguous chunks and runs fn(begin, end, chunk)
// for each, one std::thread per chunk. The chunking depends only on n and
// threads; callers merge per-chunk results in chunk order. The first exception
// thrown by any chunk is rethrown after all chunks finish.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        fn(std::size_t{0}, n, 0u);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = n * t / threads;
        const std::size_t end = n * (t + 1) / threads;
        pool.emplace_back([&, begin, end, t] {
            try {
                fn(begin, end, t);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace spatial_link
