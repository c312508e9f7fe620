#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace svcache::detail {

/// splitmix64 finalizer; decorrelates nearby seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of sub-stream `stream` of the run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Runs body(batch) for batch = 0..n_batches-1 on up to `workers` threads.
 * Callers write per-batch results into preallocated slots and reduce them
 * in batch order, so output does not depend on the worker count.
 */
template <class Body>
void for_each_batch(std::size_t n_batches, unsigned workers, Body&& body) {
    workers = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), n_batches));
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_batches; ++b) body(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t b = next++; b < n_batches; b = next++) {
                    try {
                        body(b);
                    } catch (...) {
                        std::scoped_lock lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = n_batches;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace svcache::detail
