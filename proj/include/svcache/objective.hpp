/**
 * @file objective.hpp
 * @brief Sum rate and energy efficiency of a caching policy, plus
 *        finite-difference gradients for the optimizer.
 */
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "analytic.hpp"
#include "config.hpp"
#include "popularity.hpp"
#include "power_model.hpp"

namespace svcache {

using analytic::RateTable;

/** Everything the energy-efficiency objective depends on besides the policy. */
struct ObjectiveContext {
    RateTable rates;
    PopularityProfile profile;
    NetworkConfig net;
    ContentConfig content;
    PowerCoefficients coeff;
    double theta = 0.01;

    void validate() const {
        if (!(theta > 0.0)) throw std::invalid_argument("smoothing parameter theta must be positive");
        if (rates.r_s_bl.size() < static_cast<std::size_t>(net.n1) ||
            rates.r_s_el.size() < static_cast<std::size_t>(net.n2))
            throw std::invalid_argument("rate table does not cover the configured cluster sizes");
        if (profile.p.size() != static_cast<std::size_t>(content.f_count))
            throw std::invalid_argument("popularity profile does not match the catalog size");
    }
};

/// Builds a context from a scenario with an analytic rate table.
inline ObjectiveContext make_context(const Scenario& scenario, const analytic::RateTableSettings& settings = {},
                                     double theta = 0.01) {
    ObjectiveContext ctx;
    ctx.rates = analytic::build_rate_table(scenario.network, settings);
    ctx.profile = make_profile(scenario.content);
    ctx.net = scenario.network;
    ctx.content = scenario.content;
    ctx.coeff = scenario.power;
    ctx.theta = theta;
    return ctx;
}

namespace detail {

inline void check_lengths(const std::vector<double>& a, const std::vector<double>& b, const ObjectiveContext& ctx) {
    const auto f = ctx.profile.p.size();
    if (a.size() != f || b.size() != f) throw std::invalid_argument("policy length does not match the catalog size");
}

/// Probability that exactly k of n independent trials succeed.
inline double binomial_pmf(int n, int k, double t) {
    if (t <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (t >= 1.0) return k == n ? 1.0 : 0.0;
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(log_choose + k * std::log(t) + (n - k) * std::log1p(-t));
}

}  // namespace detail

/// Expected delivery rate under fractional caching [bit/s].
inline double sum_rate_scheme1(const std::vector<double>& q1, const std::vector<double>& q2,
                               const ObjectiveContext& ctx) {
    detail::check_lengths(q1, q2, ctx);
    const auto& r = ctx.rates;
    const double s_bl = r.s_bl(ctx.net.n1), s_el = r.s_el(ctx.net.n2);
    double sum = 0.0;
    for (std::size_t f = 0; f < q1.size(); ++f) {
        const double hdv = ctx.profile.g_hdv[f];
        sum += ctx.profile.p[f] * ((1.0 - q1[f]) * r.r_m_bl + hdv * (1.0 - q2[f]) * r.r_m_el + q1[f] * s_bl +
                                   hdv * q2[f] * s_el);
    }
    return sum;
}

/// Expected delivery rate under random caching; the serving count is binomial [bit/s].
inline double sum_rate_scheme2(const std::vector<double>& t1, const std::vector<double>& t2,
                               const ObjectiveContext& ctx) {
    detail::check_lengths(t1, t2, ctx);
    const auto& r = ctx.rates;
    const int n1 = ctx.net.n1, n2 = ctx.net.n2;
    double sum = 0.0;
    for (std::size_t f = 0; f < t1.size(); ++f) {
        double bl = detail::binomial_pmf(n1, 0, t1[f]) * r.r_m_bl;
        for (int n = 1; n <= n1; ++n) bl += detail::binomial_pmf(n1, n, t1[f]) * r.s_bl(n);
        double el = detail::binomial_pmf(n2, 0, t2[f]) * r.r_m_el;
        for (int n = 1; n <= n2; ++n) el += detail::binomial_pmf(n2, n, t2[f]) * r.s_el(n);
        sum += ctx.profile.p[f] * (bl + ctx.profile.g_hdv[f] * el);
    }
    return sum;
}

inline double sum_rate(const CachingPolicy& policy, const ObjectiveContext& ctx) {
    return policy.mode == CachingMode::fractional ? sum_rate_scheme1(policy.q1, policy.q2, ctx)
                                                  : sum_rate_scheme2(policy.q1, policy.q2, ctx);
}

/// Total power; `smoothed` selects the surrogate transmit power for fractional policies.
inline PowerBreakdown total_power(const CachingPolicy& policy, const ObjectiveContext& ctx, bool smoothed) {
    if (policy.mode == CachingMode::fractional)
        return power_scheme1(policy, ctx.profile, ctx.net, ctx.content, ctx.coeff,
                             smoothed ? std::optional<double>(ctx.theta) : std::nullopt);
    return power_scheme2(policy, ctx.profile, ctx.net, ctx.content, ctx.coeff);
}

namespace detail {

inline double ratio(double rate, double power) {
    if (!(power > 0.0)) throw std::domain_error("total power must be positive to form energy efficiency");
    return rate / power;
}

}  // namespace detail

/// Energy efficiency [bit/J] as seen by the optimizer (smoothed for Scheme I).
inline double ee_value(const CachingPolicy& policy, const ObjectiveContext& ctx) {
    return detail::ratio(sum_rate(policy, ctx), total_power(policy, ctx, true).p_total);
}

/// Energy efficiency with the exact nonzero indicator. Same as ee_value for Scheme II.
inline double ee_exact(const CachingPolicy& policy, const ObjectiveContext& ctx) {
    return detail::ratio(sum_rate(policy, ctx), total_power(policy, ctx, false).p_total);
}

enum class Block { first, second };

/**
 * Gradient of ee_value with respect to one block (q1/t1 or q2/t2). Central
 * differences with step h; one-sided where the stencil would leave [0, 1].
 */
inline std::vector<double> ee_gradient(const CachingPolicy& policy, const ObjectiveContext& ctx, Block which,
                                       double h = 1e-6) {
    CachingPolicy probe = policy;
    auto& x = which == Block::first ? probe.q1 : probe.q2;
    std::vector<double> grad(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) {
        const double x0 = x[f];
        const double hi = std::min(1.0, x0 + h);
        const double lo = std::max(0.0, x0 - h);
        x[f] = hi;
        const double up = ee_value(probe, ctx);
        x[f] = lo;
        const double down = ee_value(probe, ctx);
        x[f] = x0;
        grad[f] = (up - down) / (hi - lo);
    }
    return grad;
}

}  // namespace svcache
