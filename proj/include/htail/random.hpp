#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace htail {

/// Random stream owned by one worker. The engine and the seeding procedure are
/// both fully specified by the standard, so a (seed, index) pair reproduces the
/// same draws on every platform.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : Stream(seed, 0) {}

    Stream(std::uint64_t seed, std::uint64_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        engine_.seed(seq);
    }

    /// Substream `index` of a master seed.
    static Stream substream(std::uint64_t seed, std::uint64_t index) { return Stream(seed, index); }

    /// Uniform on the open interval (0,1), 53 random bits.
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53; }

private:
    std::mt19937_64 engine_;
};

/// Fixed replicate-block partition; results depend only on the block layout,
/// never on the worker count.
struct BlockPlan {
    static constexpr std::uint64_t kBlockSize = 1u << 16;

    std::uint64_t total;

    std::uint64_t blocks() const { return (total + kBlockSize - 1) / kBlockSize; }
    std::uint64_t begin(std::uint64_t b) const { return b * kBlockSize; }
    std::uint64_t size(std::uint64_t b) const { return std::min(kBlockSize, total - begin(b)); }
};

/// Runs fn(block) for every block index, on up to `workers` threads.
template <class Fn>
void for_each_block(std::uint64_t n_blocks, unsigned workers, Fn&& fn) {
    workers = std::max(1u, workers);
    if (workers == 1 || n_blocks <= 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        const auto count = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_blocks));
        pool.reserve(count);
        for (unsigned w = 0; w < count; ++w) {
            pool.emplace_back([&] {
                try {
                    for (std::uint64_t b = next++; b < n_blocks; b = next++) fn(b);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n_blocks;
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace htail
