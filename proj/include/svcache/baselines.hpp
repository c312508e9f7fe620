#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "config.hpp"
#include "detail/parallel.hpp"
#include "estimate.hpp"
#include "objective.hpp"

namespace svcache {

namespace detail {

inline std::vector<double> leading_ones(int f_count, int ones) {
    std::vector<double> q(static_cast<std::size_t>(f_count), 0.0);
    std::fill_n(q.begin(), std::min(ones, f_count), 1.0);
    return q;
}

inline std::vector<double> random_subset(int f_count, int size, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(f_count));
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates with explicit draws so the result does not depend
    // on the standard library's shuffle implementation.
    std::vector<double> q(idx.size(), 0.0);
    for (int i = 0; i < size; ++i) {
        std::uniform_int_distribution<int> pick(i, f_count - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
        q[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 1.0;
    }
    return q;
}

}  // namespace detail

/// Most popular content: the first M_B base layers and first M_E enhancement layers.
inline CachingPolicy mpcp_policy(const ContentConfig& content, CachingMode mode = CachingMode::fractional) {
    return {mode, detail::leading_ones(content.f_count, content.bl_slots()),
            detail::leading_ones(content.f_count, content.el_slots())};
}

/// Uniform content: every file gets the same cached fraction.
inline CachingPolicy ucp_policy(const ContentConfig& content, CachingMode mode = CachingMode::fractional) {
    const auto f = static_cast<std::size_t>(content.f_count);
    return {mode, std::vector<double>(f, static_cast<double>(content.bl_slots()) / content.f_count),
            std::vector<double>(f, static_cast<double>(content.el_slots()) / content.f_count)};
}

/// Independent content: uniformly random M_B- and M_E-subsets.
inline CachingPolicy icp_policy(const ContentConfig& content, std::uint64_t seed,
                                CachingMode mode = CachingMode::fractional) {
    detail::Rng rng(detail::derive_seed(seed, 0));
    CachingPolicy policy;
    policy.mode = mode;
    policy.q1 = detail::random_subset(content.f_count, content.bl_slots(), rng);
    policy.q2 = detail::random_subset(content.f_count, content.el_slots(), rng);
    return policy;
}

/// Mean exact EE of independently drawn ICP realizations (realization k uses seed stream k).
inline Estimate icp_expected_ee(const ObjectiveContext& ctx, std::size_t realizations, std::uint64_t seed,
                                CachingMode mode = CachingMode::fractional) {
    Moments m;
    for (std::size_t k = 0; k < realizations; ++k)
        m.add(ee_exact(icp_policy(ctx.content, detail::derive_seed(seed, k), mode), ctx));
    return {m.mean(), m.std_error(), realizations, seed};
}

}  // namespace svcache
