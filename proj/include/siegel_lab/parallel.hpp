#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace siegel_lab {

/// Chunk width used for every deterministic reduction. Results must not
/// depend on the worker count, so chunking is fixed here and never derived
/// from the number of threads.
inline constexpr std::int64_t kReductionChunk = 1 << 16;

inline int& default_threads() {
    static int n = 1;
    return n;
}

/// Runs body(chunk_index, lo, hi) over [begin, end) cut into fixed chunks.
/// Chunks are claimed dynamically; bodies must write disjoint state.
template <typename Body>
void parallel_chunks(std::int64_t begin, std::int64_t end, std::int64_t chunk, Body&& body,
                     int threads = default_threads()) {
    if (end <= begin) return;
    const std::int64_t n_chunks = (end - begin + chunk - 1) / chunk;
    threads = std::max(1, std::min<int>(threads, static_cast<int>(n_chunks)));
    if (threads == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) {
            body(c, begin + c * chunk, std::min(end, begin + (c + 1) * chunk));
        }
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                body(c, begin + c * chunk, std::min(end, begin + (c + 1) * chunk));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_chunks);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Neumaier-compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

}  // namespace siegel_lab
