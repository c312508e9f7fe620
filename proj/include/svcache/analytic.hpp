/**
 * @file analytic.hpp
 * @brief Stochastic-geometry success probabilities and ergodic service
 *        rates for a user at the origin served either by its nearest MBS or
 *        by a cooperating subset of a clustered SBS group.
 *
 * Interference fields are homogeneous PPPs. For the MBS link every SBS
 * interferes. For the BL link SBSs outside the disk of radius a interfere;
 * for the EL link SBSs inside the disk and outside radius b interfere. All
 * MBSs interfere with SBS links. Fading is Rayleigh; cooperating SBSs add
 * their complex amplitudes coherently.
 *
 * Quantities over serving-SBS positions are n-dimensional expectations and
 * are estimated by Monte-Carlo integration over the positions (the fading
 * and interference averages stay exact). Everything is deterministic given
 * the sampling seed.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "config.hpp"
#include "detail/parallel.hpp"
#include "estimate.hpp"
#include "quadrature.hpp"

namespace svcache::analytic {

/**
 * G_alpha(x) = integral from x to infinity of 1/(1 + t^(alpha/2)) dt.
 *
 * Evaluated through the regularized incomplete beta function: with
 * beta = alpha/2 and s = 1/(1 + x^beta),
 * G = (pi / (beta sin(pi/beta))) * I_s(1 - 1/beta, 1/beta).
 */
inline double g_alpha(double alpha, double x) {
    if (!(alpha > 2.0)) throw std::domain_error("g_alpha: exponent must exceed 2");
    if (!(x >= 0.0)) throw std::domain_error("g_alpha: argument must be non-negative");
    const double beta = alpha / 2.0;
    const double whole = std::numbers::pi / (beta * std::sin(std::numbers::pi / beta));
    if (x == 0.0) return whole;
    if (std::isinf(x)) return 0.0;
    const double xb = std::pow(x, beta);
    // For small x the argument 1/(1+x^beta) rounds to one; use the mirrored form.
    if (xb < 1.0) return whole * boost::math::ibetac(1.0 / beta, 1.0 - 1.0 / beta, xb / (1.0 + xb));
    return whole * boost::math::ibeta(1.0 - 1.0 / beta, 1.0 / beta, 1.0 / (1.0 + xb));
}

/// Integral from 0 to y of 1/(1 + t^(alpha/2)) dt, without cancellation for small y.
inline double g_alpha_head(double alpha, double y) {
    if (!(alpha > 2.0)) throw std::domain_error("g_alpha_head: exponent must exceed 2");
    if (!(y >= 0.0)) throw std::domain_error("g_alpha_head: argument must be non-negative");
    if (y == 0.0) return 0.0;
    const double beta = alpha / 2.0;
    const double whole = std::numbers::pi / (beta * std::sin(std::numbers::pi / beta));
    if (std::isinf(y)) return whole;
    const double yb = std::pow(y, beta);
    if (yb > 1.0) return whole * boost::math::ibetac(1.0 - 1.0 / beta, 1.0 / beta, 1.0 / (1.0 + yb));
    return whole * boost::math::ibeta(1.0 / beta, 1.0 - 1.0 / beta, yb / (1.0 + yb));
}

enum class Layer { base, enhancement };

/// Which evaluation path to use. `automatic` takes the arctangent forms when both exponents are 4.
enum class Route { automatic, general, closed_form };

/**
 * How the ergodic rate averages over the serving distances.
 *
 * `joint` conditions on SIR >= gamma jointly over positions and fading,
 * which is the conditional mean W E[log2(1 + SIR) | SIR >= gamma].
 * `per_position` forms the ratio P(SIR >= t | x) / P(SIR >= gamma | x) at
 * each position and averages it with the unconditional position density;
 * it understates the conditional mean because it ignores that success
 * favours short serving distances.
 */
enum class RateConditioning { joint, per_position };

struct PositionSampling {
    std::size_t samples = 200000;
    std::uint64_t seed = 1;
    unsigned workers = 0;  ///< 0: hardware concurrency
};

namespace detail {

inline constexpr double pi = std::numbers::pi;
inline constexpr std::size_t position_batch = 2048;

inline bool use_closed_form(const NetworkConfig& cfg, Route route) {
    if (route == Route::closed_form) {
        if (!cfg.both_exponents_four())
            throw std::invalid_argument("closed-form route requires alpha_m = alpha_s = 4");
        return true;
    }
    return route == Route::automatic && cfg.both_exponents_four();
}

/// log P(SIR_M >= t | y), y = pi lambda_M r^2 with r the nearest-MBS distance.
struct MbsConditional {
    const NetworkConfig& cfg;
    bool closed;

    double log_success(double t, double y) const {
        const double r2 = y / (pi * cfg.lambda_m);
        if (closed) {
            const double st = std::sqrt(t);
            return -y * st * std::atan(st) -
                   pi * cfg.lambda_s * std::sqrt(t * cfg.p_s / cfg.p_m) * r2 * (pi / 2.0);
        }
        const double am = cfg.alpha_m, as = cfg.alpha_s;
        const double tm = std::pow(t, 2.0 / am);
        const double mbs = y * tm * g_alpha(am, 1.0 / tm);
        const double sbs = pi * cfg.lambda_s * std::pow(t * cfg.p_s / cfg.p_m, 2.0 / as) *
                           std::pow(r2, am / as) * g_alpha(as, 0.0);
        return -(mbs + sbs);
    }
};

/// log P(SIR >= t | serving positions), written in c = t / sum_k r_k^-alpha_S.
struct ClusterConditional {
    const NetworkConfig& cfg;
    Layer layer;
    bool closed;
    double mbs_coeff;  ///< pi lambda_M (P_M/P_S)^(2/alpha_M) G_alpha_M(0)

    ClusterConditional(const NetworkConfig& c, Layer l, bool closed_form)
        : cfg(c), layer(l), closed(closed_form) {
        mbs_coeff = closed ? pi * c.lambda_m * std::sqrt(c.p_m / c.p_s) * (pi / 2.0)
                           : pi * c.lambda_m * std::pow(c.p_m / c.p_s, 2.0 / c.alpha_m) *
                                 g_alpha(c.alpha_m, 0.0);
    }

    double log_success(double c) const {
        const double a2 = cfg.a * cfg.a, b2 = cfg.b * cfg.b;
        if (closed) {
            const double sc = std::sqrt(c);
            double sbs = 0.0;
            if (layer == Layer::base) {
                sbs = cfg.lambda_s * std::atan(sc / a2);  // arccot(a^2 / sqrt(c))
            } else {
                sbs = cfg.lambda_s * (std::atan(a2 / sc) + std::atan(sc / b2));
            }
            return -(pi * sbs * sc + mbs_coeff * sc);
        }
        const double as = cfg.alpha_s;
        const double c2 = std::pow(c, 2.0 / as);
        double sbs = 0.0;
        if (layer == Layer::base) {
            sbs = g_alpha(as, a2 / c2);
        } else {
            sbs = g_alpha_head(as, a2 / c2) + g_alpha(as, b2 / c2);
        }
        return -(pi * cfg.lambda_s * c2 * sbs + mbs_coeff * std::pow(c, 2.0 / cfg.alpha_m));
    }
};

/// Draws `count` squared radii uniform in the cluster region of `layer`.
inline void draw_cluster_r2(const NetworkConfig& cfg, Layer layer, int count, svcache::detail::Rng& rng,
                            std::vector<double>& out) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    out.resize(static_cast<std::size_t>(count));
    const double a2 = cfg.a * cfg.a, b2 = cfg.b * cfg.b;
    for (auto& r2 : out) {
        const double u = 1.0 - unit(rng);  // (0, 1]
        r2 = layer == Layer::base ? a2 * u : a2 + (b2 - a2) * u;
    }
}

inline int cluster_size(const NetworkConfig& cfg, Layer layer) {
    return layer == Layer::base ? cfg.n1 : cfg.n2;
}

/**
 * Visits `sampling.samples` position draws of n serving SBSs and hands
 * each sum_k r_k^-alpha_S to `per_sample`, which returns the values to
 * accumulate. Every sample draws the full cluster so that results for
 * different n share their random numbers. When `cross` is given it receives
 * sum_i v_j(i) v_{j+1}(i) for each j (indices modulo K).
 */
template <std::size_t K, class PerSample>
std::array<Moments, K> sample_positions(const NetworkConfig& cfg, Layer layer, int n_serving,
                                        const PositionSampling& sampling, PerSample&& per_sample,
                                        std::array<double, K>* cross = nullptr) {
    if (n_serving < 1) throw std::invalid_argument("serving SBS count must be at least 1");
    if (sampling.samples < 2) throw std::invalid_argument("position sampling needs at least 2 samples");
    const int draws = std::max(n_serving, cluster_size(cfg, layer));
    const std::size_t n_batches = (sampling.samples + position_batch - 1) / position_batch;
    std::vector<std::array<Moments, K>> partial(n_batches);
    std::vector<std::array<double, K>> partial_cross(n_batches, std::array<double, K>{});
    const double half_alpha = cfg.alpha_s / 2.0;
    svcache::detail::for_each_batch(n_batches, sampling.workers, [&](std::size_t batch) {
        svcache::detail::Rng rng(svcache::detail::derive_seed(sampling.seed, batch));
        std::vector<double> r2;
        const std::size_t begin = batch * position_batch;
        const std::size_t end = std::min(sampling.samples, begin + position_batch);
        for (std::size_t i = begin; i < end; ++i) {
            draw_cluster_r2(cfg, layer, draws, rng, r2);
            double strength = 0.0;
            for (int k = 0; k < n_serving; ++k)
                strength += half_alpha == 2.0 ? 1.0 / (r2[k] * r2[k]) : std::pow(r2[k], -half_alpha);
            const std::array<double, K> v = per_sample(strength);
            for (std::size_t j = 0; j < K; ++j) {
                partial[batch][j].add(v[j]);
                partial_cross[batch][j] += v[j] * v[(j + 1) % K];
            }
        }
    });
    std::array<Moments, K> total{};
    if (cross) cross->fill(0.0);
    for (std::size_t b = 0; b < n_batches; ++b) {
        for (std::size_t j = 0; j < K; ++j) {
            total[j].merge(partial[b][j]);
            if (cross) (*cross)[j] += partial_cross[b][j];
        }
    }
    return total;
}

/// Integral over t in [gamma, inf) of ratio(t)/(1+t) dt via t = gamma e^s.
template <class Ratio>
double log_tail_integral(double gamma, Ratio&& ratio) {
    TailControl ctl;
    ctl.rel_tail = 1e-8;
    ctl.piece_tol = 1e-9;
    ctl.max_depth = 6;
    auto integrand = [&](double s) {
        const double t = gamma * std::exp(s);
        return ratio(t) * t / (1.0 + t);
    };
    return integrate_to_infinity(integrand, 0.0, ctl).value;
}

inline void require_threshold(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("SIR threshold must be positive and finite");
}

}  // namespace detail

/// Radial integral for P(SIR_M >= gamma), with quadrature metadata.
inline QuadratureResult p_success_mbs_integral(const NetworkConfig& cfg, double gamma,
                                               Route route = Route::general) {
    detail::require_threshold(gamma);
    const detail::MbsConditional cond{cfg, detail::use_closed_form(cfg, route)};
    TailControl ctl;
    // e^-y times the conditional; pieces start at the decay scale.
    const double tm = std::pow(gamma, 2.0 / cfg.alpha_m);
    ctl.first_width = 1.0 / (1.0 + tm * g_alpha(cfg.alpha_m, 1.0 / tm));
    return integrate_to_infinity([&](double y) { return std::exp(-y + cond.log_success(gamma, y)); }, 0.0,
                                 ctl);
}

/// P(SIR_M >= gamma) by radial quadrature over the nearest-MBS distance.
inline double p_success_mbs(const NetworkConfig& cfg, double gamma) {
    return std::clamp(p_success_mbs_integral(cfg, gamma, Route::general).value, 0.0, 1.0);
}

/// Closed form of P(SIR_M >= gamma) for alpha_M = alpha_S = 4.
inline double p_success_mbs_closed(const NetworkConfig& cfg, double gamma) {
    detail::require_threshold(gamma);
    if (!cfg.both_exponents_four())
        throw std::invalid_argument("p_success_mbs_closed requires alpha_m = alpha_s = 4");
    const double sg = std::sqrt(gamma);
    const double inner = std::numbers::pi / 2.0 * cfg.lambda_s * std::sqrt(cfg.p_s / cfg.p_m) +
                         cfg.lambda_m * std::atan(sg);  // arccot(gamma^-1/2)
    return 1.0 / (1.0 + sg * inner / cfg.lambda_m);
}

/// P(SIR_M >= gamma) along the requested route.
inline double p_success_mbs(const NetworkConfig& cfg, double gamma, Route route) {
    if (detail::use_closed_form(cfg, route)) return p_success_mbs_closed(cfg, gamma);
    return p_success_mbs(cfg, gamma);
}

/**
 * P(SIR_S >= gamma) for n_serving cooperating SBSs of the given layer's
 * cluster, averaged over uniformly placed serving positions.
 */
inline Estimate p_success_sbs(const NetworkConfig& cfg, Layer layer, double gamma, int n_serving,
                              const PositionSampling& sampling = {}, Route route = Route::automatic) {
    detail::require_threshold(gamma);
    const detail::ClusterConditional cond(cfg, layer, detail::use_closed_form(cfg, route));
    auto m = detail::sample_positions<1>(cfg, layer, n_serving, sampling, [&](double strength) {
        return std::array<double, 1>{std::exp(cond.log_success(gamma / strength))};
    });
    return {std::clamp(m[0].mean(), 0.0, 1.0), m[0].std_error(), sampling.samples, sampling.seed};
}

inline Estimate p_success_sbs_bl(const NetworkConfig& cfg, double gamma_bl, int n1_serving,
                                 const PositionSampling& sampling = {}, Route route = Route::automatic) {
    return p_success_sbs(cfg, Layer::base, gamma_bl, n1_serving, sampling, route);
}

inline Estimate p_success_sbs_el(const NetworkConfig& cfg, double gamma_el, int n2_serving,
                                 const PositionSampling& sampling = {}, Route route = Route::automatic) {
    return p_success_sbs(cfg, Layer::enhancement, gamma_el, n2_serving, sampling, route);
}

/**
 * Ergodic rate from the nearest MBS, W E[log2(1+SIR_M) | SIR_M >= gamma].
 * Result is at least W log2(1+gamma); W = 0 gives 0.
 */
inline double ergodic_rate_mbs(const NetworkConfig& cfg, double gamma,
                               RateConditioning conditioning = RateConditioning::joint,
                               Route route = Route::automatic) {
    detail::require_threshold(gamma);
    const double floor_term = std::log2(1.0 + gamma);
    double tail = 0.0;
    if (conditioning == RateConditioning::joint) {
        const double base = p_success_mbs(cfg, gamma, route);
        if (base <= 0.0) throw NumericError("P(SIR_M >= gamma) underflowed", base, 0.0);
        tail = detail::log_tail_integral(gamma, [&](double t) { return p_success_mbs(cfg, t, route) / base; });
    } else {
        const detail::MbsConditional cond{cfg, detail::use_closed_form(cfg, route)};
        auto outer = [&](double y) {
            const double ref = cond.log_success(gamma, y);
            const double inner = detail::log_tail_integral(
                gamma, [&](double t) { return std::exp(cond.log_success(t, y) - ref); });
            return std::exp(-y) * inner;
        };
        TailControl ctl;
        ctl.piece_tol = 1e-9;
        ctl.first_width = 0.25;
        tail = integrate_to_infinity(outer, 0.0, ctl).value;
    }
    return cfg.w * (floor_term + tail / std::numbers::ln2);
}

/**
 * Ergodic rate of n_serving cooperating SBSs of the given layer. The floor
 * term is exact; the tail term is a position average and carries the
 * reported standard error.
 */
inline Estimate ergodic_rate_sbs(const NetworkConfig& cfg, Layer layer, double gamma, int n_serving,
                                 const PositionSampling& sampling = {},
                                 RateConditioning conditioning = RateConditioning::joint,
                                 Route route = Route::automatic) {
    detail::require_threshold(gamma);
    const detail::ClusterConditional cond(cfg, layer, detail::use_closed_form(cfg, route));
    const double scale = cfg.w / std::numbers::ln2;
    const double floor_rate = cfg.w * std::log2(1.0 + gamma);

    if (conditioning == RateConditioning::per_position) {
        auto m = detail::sample_positions<1>(cfg, layer, n_serving, sampling, [&](double strength) {
            const double ref = cond.log_success(gamma / strength);
            const double tail = detail::log_tail_integral(
                gamma, [&](double t) { return std::exp(cond.log_success(t / strength) - ref); });
            return std::array<double, 1>{tail};
        });
        return {floor_rate + scale * m[0].mean(), scale * m[0].std_error(), sampling.samples, sampling.seed};
    }

    // Ratio of two position averages: E[int P(t|x)/(1+t) dt] / E[P(gamma|x)].
    std::array<double, 2> cross{};
    auto m = detail::sample_positions<2>(
        cfg, layer, n_serving, sampling,
        [&](double strength) {
            const double tail = detail::log_tail_integral(
                gamma, [&](double t) { return std::exp(cond.log_success(t / strength)); });
            return std::array<double, 2>{tail, std::exp(cond.log_success(gamma / strength))};
        },
        &cross);
    const double num = m[0].mean(), den = m[1].mean();
    if (den <= 0.0) throw NumericError("P(SIR_S >= gamma) underflowed at every sampled position", den, 0.0);
    const double ratio = num / den;
    // Delta-method variance of the ratio estimator.
    const double n = m[0].n;
    const double cov = (cross[0] - n * num * den) / (n - 1.0);
    const double var = (m[0].variance() - 2.0 * ratio * cov + ratio * ratio * m[1].variance()) / (den * den);
    return {floor_rate + scale * ratio, scale * std::sqrt(std::max(0.0, var) / n), sampling.samples,
            sampling.seed};
}

inline Estimate ergodic_rate_sbs_bl(const NetworkConfig& cfg, double gamma_bl, int n1_serving,
                                    const PositionSampling& sampling = {},
                                    RateConditioning conditioning = RateConditioning::joint) {
    return ergodic_rate_sbs(cfg, Layer::base, gamma_bl, n1_serving, sampling, conditioning);
}

inline Estimate ergodic_rate_sbs_el(const NetworkConfig& cfg, double gamma_el, int n2_serving,
                                    const PositionSampling& sampling = {},
                                    RateConditioning conditioning = RateConditioning::joint) {
    return ergodic_rate_sbs(cfg, Layer::enhancement, gamma_el, n2_serving, sampling, conditioning);
}

enum class Provenance { analytic, monte_carlo };

/**
 * Ergodic rates consumed by the sum-rate models: the MBS rate at both
 * layer thresholds and the cooperative rates for every serving count.
 */
struct RateTable {
    double r_m_bl = 0.0;
    double r_m_el = 0.0;
    std::vector<double> r_s_bl;  ///< index n-1, n = 1..N1
    std::vector<double> r_s_el;  ///< index n-1, n = 1..N2
    std::vector<double> r_s_bl_error;
    std::vector<double> r_s_el_error;
    Provenance provenance = Provenance::analytic;
    std::uint64_t seed = 0;
    std::size_t samples = 0;

    double s_bl(int n) const { return r_s_bl.at(static_cast<std::size_t>(n - 1)); }
    double s_el(int n) const { return r_s_el.at(static_cast<std::size_t>(n - 1)); }
    std::size_t entry_count() const { return 2 + r_s_bl.size() + r_s_el.size(); }
};

struct RateTableSettings {
    PositionSampling sampling;
    RateConditioning conditioning = RateConditioning::joint;
    Route route = Route::automatic;
};

inline RateTable build_rate_table(const NetworkConfig& cfg, const RateTableSettings& settings = {}) {
    cfg.validate();
    RateTable table;
    table.provenance = Provenance::analytic;
    table.seed = settings.sampling.seed;
    table.samples = settings.sampling.samples;
    table.r_m_bl = ergodic_rate_mbs(cfg, cfg.gamma_bl, settings.conditioning, settings.route);
    table.r_m_el = ergodic_rate_mbs(cfg, cfg.gamma_el, settings.conditioning, settings.route);
    for (int n = 1; n <= cfg.n1; ++n) {
        const auto e = ergodic_rate_sbs(cfg, Layer::base, cfg.gamma_bl, n, settings.sampling,
                                        settings.conditioning, settings.route);
        table.r_s_bl.push_back(e.mean);
        table.r_s_bl_error.push_back(e.std_error);
    }
    for (int n = 1; n <= cfg.n2; ++n) {
        const auto e = ergodic_rate_sbs(cfg, Layer::enhancement, cfg.gamma_el, n, settings.sampling,
                                        settings.conditioning, settings.route);
        table.r_s_el.push_back(e.mean);
        table.r_s_el_error.push_back(e.std_error);
    }
    return table;
}

}  // namespace svcache::analytic
