#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <svcache/baselines.hpp>
#include <svcache/objective.hpp>

#include "fixtures.hpp"

using namespace svcache;

namespace {

CachingPolicy constant(double q1, double q2, CachingMode mode) {
    return {mode, std::vector<double>(20, q1), std::vector<double>(20, q2)};
}

double mbs_only(const ObjectiveContext& ctx) {
    double s = 0.0;
    for (std::size_t f = 0; f < 20; ++f)
        s += ctx.profile.p[f] * (ctx.rates.r_m_bl + ctx.profile.g_hdv[f] * ctx.rates.r_m_el);
    return s;
}

double sbs_only(const ObjectiveContext& ctx) {
    double s = 0.0;
    for (std::size_t f = 0; f < 20; ++f)
        s += ctx.profile.p[f] * (ctx.rates.s_bl(4) + ctx.profile.g_hdv[f] * ctx.rates.s_el(4));
    return s;
}

}  // namespace

TEST(SumRate, FractionalExtremes) {
    const auto ctx = reference_context();
    EXPECT_NEAR(sum_rate_scheme1(constant(0, 0, {}).q1, constant(0, 0, {}).q2, ctx), mbs_only(ctx), 1e-6);
    EXPECT_NEAR(sum_rate_scheme1(constant(1, 1, {}).q1, constant(1, 1, {}).q2, ctx), sbs_only(ctx), 1e-6);
}

TEST(SumRate, UniformPlacementIsConvexCombination) {
    const auto ctx = reference_context();
    const auto u = ucp_policy(ctx.content);
    // Per file: BL weight 5/20, EL weight 2/20.
    double expect = 0.0;
    for (std::size_t f = 0; f < 20; ++f) {
        const double g = ctx.profile.g_hdv[f];
        expect += ctx.profile.p[f] * (0.75 * ctx.rates.r_m_bl + 0.25 * ctx.rates.s_bl(4) +
                                      g * (0.9 * ctx.rates.r_m_el + 0.1 * ctx.rates.s_el(4)));
    }
    EXPECT_NEAR(sum_rate(u, ctx) / expect, 1.0, 1e-14);
}

TEST(SumRate, FractionalIsAffineInEachEntry) {
    const auto ctx = reference_context();
    auto p = ucp_policy(ctx.content);
    for (std::size_t f : {0u, 7u, 19u}) {
        std::array<double, 3> v{};
        for (int k = 0; k < 3; ++k) {
            p.q1[f] = 0.1 + 0.4 * k;
            v[k] = sum_rate(p, ctx);
        }
        EXPECT_NEAR(v[1] - v[0], v[2] - v[1], 1e-9 * v[1]);
        p.q1[f] = 0.25;
    }
}

TEST(SumRate, RandomExtremes) {
    const auto ctx = reference_context();
    EXPECT_NEAR(sum_rate(constant(0, 0, CachingMode::random), ctx), mbs_only(ctx), 1e-6);
    EXPECT_NEAR(sum_rate(constant(1, 1, CachingMode::random), ctx), sbs_only(ctx), 1e-6);
}

TEST(SumRate, BinomialWeightsPartitionUnity) {
    for (int n = 1; n <= 16; ++n)
        for (double t : {0.0, 0.01, 0.3, 0.5, 0.97, 1.0}) {
            double s = 0.0;
            for (int k = 0; k <= n; ++k) s += detail::binomial_pmf(n, k, t);
            EXPECT_NEAR(s, 1.0, 1e-12) << n << " " << t;
        }
    EXPECT_NEAR(detail::binomial_pmf(4, 0, 0.3), std::pow(0.7, 4), 1e-15);
    EXPECT_NEAR(detail::binomial_pmf(4, 2, 0.3), 6 * 0.09 * 0.49, 1e-15);
}

TEST(SumRate, RandomMatchesFractionalOnBinaryPolicies) {
    const auto ctx = reference_context();
    auto p1 = mpcp_policy(ctx.content);
    auto p2 = mpcp_policy(ctx.content, CachingMode::random);
    EXPECT_NEAR(sum_rate(p2, ctx), sum_rate(p1, ctx), 1e-6);
}

TEST(SumRate, RejectsLengthMismatch) {
    const auto ctx = reference_context();
    EXPECT_THROW(sum_rate_scheme1(std::vector<double>(3), std::vector<double>(20), ctx), std::invalid_argument);
    EXPECT_THROW(sum_rate_scheme2(std::vector<double>(20), std::vector<double>(21), ctx), std::invalid_argument);
}

TEST(EnergyEfficiency, NoCachingTiesBothSchemes) {
    const auto ctx = reference_context();
    EXPECT_DOUBLE_EQ(ee_value(constant(0, 0, CachingMode::fractional), ctx),
                     ee_value(constant(0, 0, CachingMode::random), ctx));
    EXPECT_GT(ee_value(constant(0, 0, CachingMode::fractional), ctx), 0.0);
}

TEST(EnergyEfficiency, ScalesWithBandwidth) {
    auto ctx = reference_context();
    const auto p = ucp_policy(ctx.content, CachingMode::random);
    const double base = ee_value(p, ctx);
    auto scaled = ctx;
    for (double* r : {&scaled.rates.r_m_bl, &scaled.rates.r_m_el}) *r *= 3.0;
    for (auto& r : scaled.rates.r_s_bl) r *= 3.0;
    for (auto& r : scaled.rates.r_s_el) r *= 3.0;
    EXPECT_NEAR(ee_value(p, scaled) / base, 3.0, 1e-14);
}

TEST(EnergyEfficiency, MostPopularPlacementComposesIndependentEvaluations) {
    const auto ctx = reference_context();
    const auto p = mpcp_policy(ctx.content);
    double rate = 0.0, tr = 0.0, bh = 0.0;
    for (std::size_t f = 0; f < 20; ++f) {
        const double q1 = f < 5 ? 1.0 : 0.0, q2 = f < 2 ? 1.0 : 0.0, g = ctx.profile.g_hdv[f], pf = ctx.profile.p[f];
        rate += pf * ((1 - q1) * ctx.rates.r_m_bl + g * (1 - q2) * ctx.rates.r_m_el + q1 * ctx.rates.s_bl(4) +
                      g * q2 * ctx.rates.s_el(4));
        tr += pf * 4.7 * ((4 * q1 + g * 4 * q2) * ctx.net.p_s + ((1 - q1) + g * (1 - q2)) * ctx.net.p_m);
        bh += pf * 5e-7 * ((1 - q1) * 1e8 + g * (1 - q2) * 2e8);
    }
    const double ca = 6.25e-12 * (5 * 1e8 * 4 + 2 * 2e8 * 4);
    const double expect = rate / (tr + ca + bh + 184.4);
    EXPECT_NEAR(ee_value(p, ctx) / expect, 1.0, 1e-12);
    EXPECT_NEAR(ee_exact(p, ctx) / expect, 1.0, 1e-12);
}

TEST(EnergyEfficiency, SmoothedDiffersOnlyOffVertices) {
    const auto ctx = reference_context();
    const auto u = ucp_policy(ctx.content);
    EXPECT_GT(ee_value(u, ctx), ee_exact(u, ctx));  // f_theta < 1 lowers transmit power
    const auto u2 = ucp_policy(ctx.content, CachingMode::random);
    EXPECT_EQ(ee_value(u2, ctx), ee_exact(u2, ctx));
}

TEST(Gradient, ConstantObjectiveHasZeroGradient) {
    auto ctx = reference_context();
    ctx.coeff.c_bh = ctx.coeff.c_ca = ctx.coeff.zeta_s = ctx.coeff.zeta_m = 0.0;
    ctx.rates.r_m_bl = ctx.rates.r_m_el = 5e7;
    ctx.rates.r_s_bl.assign(4, 5e7);
    ctx.rates.r_s_el.assign(4, 5e7);
    for (auto mode : {CachingMode::fractional, CachingMode::random}) {
        const auto p = ucp_policy(ctx.content, mode);
        // EE is ~1e5 bit/J here, so round-off alone leaves ~1e-5 in a 1e-6 difference quotient.
        const double scale = ee_value(p, ctx);
        for (auto which : {Block::first, Block::second})
            for (double g : ee_gradient(p, ctx, which)) EXPECT_NEAR(g / scale, 0.0, 1e-8);
    }
}

TEST(Gradient, OrderingFollowsPopularity) {
    const auto ctx = reference_context();
    const auto grad = ee_gradient(ucp_policy(ctx.content), ctx, Block::first);
    for (std::size_t f = 1; f < grad.size(); ++f) EXPECT_LT(std::abs(grad[f]), std::abs(grad[f - 1])) << f;
}

TEST(Gradient, StepHalvingConsistency) {
    const auto ctx = reference_context();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    for (auto mode : {CachingMode::fractional, CachingMode::random}) {
        CachingPolicy p = constant(0, 0, mode);
        for (auto& x : p.q1) x = unit(rng);
        for (auto& x : p.q2) x = unit(rng);
        for (auto which : {Block::first, Block::second}) {
            const auto g6 = ee_gradient(p, ctx, which, 1e-6);
            const auto g7 = ee_gradient(p, ctx, which, 1e-7);
            for (std::size_t f = 0; f < g6.size(); ++f)
                EXPECT_NEAR(g7[f], g6[f], 1e-4 * std::abs(g6[f]) + 1e-6) << f;
        }
    }
}

TEST(Gradient, OneSidedAtBounds) {
    const auto ctx = reference_context();
    const auto p = mpcp_policy(ctx.content, CachingMode::random);
    const auto g = ee_gradient(p, ctx, Block::first);
    for (double x : g) EXPECT_TRUE(std::isfinite(x));
}

TEST(EnergyEfficiency, InvariantUnderRelabelingOfIdenticalFiles) {
    auto ctx = reference_context();
    ctx.profile.p.assign(20, 0.05);
    ctx.profile.g_hdv.assign(20, 0.5);
    ctx.profile.g_sdv.assign(20, 0.5);
    auto p = mpcp_policy(ctx.content, CachingMode::random);
    p.q1[0] = 0.6;
    p.q1[7] = 0.4;
    auto q = p;
    std::reverse(q.q1.begin(), q.q1.end());
    std::rotate(q.q2.begin(), q.q2.begin() + 5, q.q2.end());
    EXPECT_NEAR(ee_value(p, ctx) / ee_value(q, ctx), 1.0, 1e-14);
}
