/**
 * @file power_model.hpp
 * @brief Network power consumption under fractional (Scheme I) and random
 *        (Scheme II) caching.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "config.hpp"
#include "popularity.hpp"

namespace svcache {

struct PowerBreakdown {
    double p_tr = 0.0;   ///< transmission
    double p_ca = 0.0;   ///< caching
    double p_bh = 0.0;   ///< backhaul
    double p_fix = 0.0;  ///< site cooling, control, circuits
    double p_total = 0.0;
};

/// Log-based surrogate of the nonzero indicator on [0, 1].
inline double smooth_l0(double x, double theta) {
    if (!(theta > 0.0)) throw std::domain_error("smooth_l0: theta must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("smooth_l0: argument must lie in [0, 1]");
    return std::log1p(x / theta) / std::log1p(1.0 / theta);
}

/// Exact nonzero indicator with a 1e-12 dead zone.
inline double exact_l0(double x) { return std::abs(x) > 1e-12 ? 1.0 : 0.0; }

inline double fixed_power(const NetworkConfig& net, const PowerCoefficients& coeff) {
    return (net.n1 + net.n2) * coeff.p_s_fix + coeff.p_m_fix;
}

namespace detail {

inline void check_policy(const CachingPolicy& policy, const PopularityProfile& profile,
                         const ContentConfig& content, CachingMode expected) {
    const auto f = static_cast<std::size_t>(content.f_count);
    if (policy.q1.size() != f || policy.q2.size() != f || profile.p.size() != f)
        throw std::invalid_argument("policy and popularity profile must have one entry per file");
    if (policy.mode != expected) throw std::invalid_argument("policy mode does not match the caching scheme");
}

inline void finish(PowerBreakdown& b) { b.p_total = b.p_tr + b.p_ca + b.p_bh + b.p_fix; }

}  // namespace detail

/**
 * Scheme I power. Transmit power counts an active SBS cluster (or MBS)
 * whenever the cached (or missing) fraction of a layer is nonzero; with
 * `theta` set, the indicator is replaced by smooth_l0.
 */
inline PowerBreakdown power_scheme1(const CachingPolicy& policy, const PopularityProfile& profile,
                                    const NetworkConfig& net, const ContentConfig& content,
                                    const PowerCoefficients& coeff, std::optional<double> theta = std::nullopt) {
    detail::check_policy(policy, profile, content, CachingMode::fractional);
    auto l0 = [&](double x) { return theta ? smooth_l0(std::clamp(x, 0.0, 1.0), *theta) : exact_l0(x); };
    PowerBreakdown b;
    for (std::size_t f = 0; f < policy.q1.size(); ++f) {
        const double q1 = policy.q1[f], q2 = policy.q2[f];
        const double hdv = profile.g_hdv[f];
        b.p_tr += profile.p[f] * (coeff.zeta_s * (net.n1 * l0(q1) + hdv * net.n2 * l0(q2)) * net.p_s +
                                  coeff.zeta_m * (l0(1.0 - q1) + hdv * l0(1.0 - q2)) * net.p_m);
        b.p_ca += q1 * content.l_b * net.n1 + q2 * content.l_e * net.n2;
        b.p_bh += profile.p[f] * ((1.0 - q1) * content.l_b + hdv * (1.0 - q2) * content.l_e);
    }
    b.p_ca *= coeff.c_ca;
    b.p_bh *= coeff.c_bh;
    b.p_fix = fixed_power(net, coeff);
    detail::finish(b);
    return b;
}

/**
 * Scheme II power. Each SBS caches a whole layer with probability T, so a
 * cluster of N misses a layer with probability (1 - T)^N.
 */
inline PowerBreakdown power_scheme2(const CachingPolicy& policy, const PopularityProfile& profile,
                                    const NetworkConfig& net, const ContentConfig& content,
                                    const PowerCoefficients& coeff) {
    detail::check_policy(policy, profile, content, CachingMode::random);
    const double el_bits = coeff.el_caching_uses_bl_size ? content.l_b : content.l_e;
    PowerBreakdown b;
    for (std::size_t f = 0; f < policy.q1.size(); ++f) {
        const double t1 = policy.q1[f], t2 = policy.q2[f];
        const double hdv = profile.g_hdv[f];
        b.p_tr += profile.p[f] * (coeff.zeta_s * (net.n1 * t1 + hdv * net.n2 * t2) * net.p_s +
                                  coeff.zeta_m * ((1.0 - t1) + hdv * (1.0 - t2)) * net.p_m);
        b.p_ca += t1 * content.l_b * net.n1 + t2 * el_bits * net.n2;
        b.p_bh += profile.p[f] * (std::pow(1.0 - t1, net.n1) * content.l_b +
                                  hdv * std::pow(1.0 - t2, net.n2) * content.l_e);
    }
    b.p_ca *= coeff.c_ca;
    b.p_bh *= coeff.c_bh;
    b.p_fix = fixed_power(net, coeff);
    detail::finish(b);
    return b;
}

}  // namespace svcache
