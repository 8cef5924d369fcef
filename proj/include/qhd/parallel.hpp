#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace qhd {

/// Worker count used by the parallel kernels. Results never depend on it.
void set_num_threads(int n);
int num_threads() noexcept;

/// Splits [0, n) into contiguous chunks, one per worker, and calls
/// f(begin, end, worker). Runs inline with one worker or small n.
template <class F>
void parallel_for(std::size_t n, F&& f, std::size_t min_chunk = 4096) {
    const auto workers = static_cast<std::size_t>(std::max(1, num_threads()));
    const std::size_t chunks = std::min(workers, std::max<std::size_t>(1, n / min_chunk));
    if (chunks <= 1) {
        f(std::size_t{0}, n, std::size_t{0});
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(chunks - 1);
    const std::size_t step = (n + chunks - 1) / chunks;
    for (std::size_t c = 1; c < chunks; ++c) {
        const std::size_t b = std::min(n, c * step), e = std::min(n, (c + 1) * step);
        pool.emplace_back([&f, b, e, c] { f(b, e, c); });
    }
    f(std::size_t{0}, std::min(n, step), std::size_t{0});
    for (auto& t : pool) t.join();
}

}  // namespace qhd
