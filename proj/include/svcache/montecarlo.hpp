/**
 * @file montecarlo.hpp
 * @brief End-to-end simulation of the two-tier network around a user at the
 *        origin: PPP base-station fields, Rayleigh fading and the three SIRs.
 *
 * One drop holds an MBS field, an SBS field (both PPPs on a disk window
 * around the user) and the serving candidates of both clusters (N1 points
 * uniform in the disk of radius a, N2 uniform in the annulus a..b). Every
 * link SIR is read off the same drop:
 *
 *   - MBS link: nearest MBS serves; all other MBSs and all field SBSs interfere.
 *   - BL link: the first n cluster-1 candidates transmit coherently; field
 *     SBSs outside radius a and all MBSs interfere.
 *   - EL link: the first n cluster-2 candidates transmit coherently; field
 *     SBSs inside radius a or outside radius b and all MBSs interfere.
 *
 * Drops are generated in fixed-size batches, each with its own seed derived
 * from (seed, batch), so results are bit-identical for any worker count.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "analytic.hpp"
#include "config.hpp"
#include "detail/parallel.hpp"
#include "estimate.hpp"

namespace svcache::montecarlo {

using analytic::Layer;
using detail::Rng;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/** Disk (inner_radius = 0) or annulus centred on the user. */
struct Region {
    double inner_radius = 0.0;
    double outer_radius = 0.0;

    double area() const {
        return std::numbers::pi * (outer_radius * outer_radius - inner_radius * inner_radius);
    }
};

/// Squared distances of a PPP of the given density on `region`.
inline std::vector<double> sample_ppp_r2(double density, const Region& region, Rng& rng) {
    if (!(density >= 0.0)) throw std::invalid_argument("sample_ppp: density must be non-negative");
    if (!(region.inner_radius >= 0.0) || !(region.outer_radius >= region.inner_radius))
        throw std::invalid_argument("sample_ppp: invalid region");
    std::vector<double> r2;
    const double mean = density * region.area();
    if (mean <= 0.0) return r2;
    std::poisson_distribution<long> count(mean);
    r2.resize(static_cast<std::size_t>(count(rng)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double lo = region.inner_radius * region.inner_radius;
    const double span = region.outer_radius * region.outer_radius - lo;
    for (double& v : r2) v = lo + span * (1.0 - unit(rng));
    return r2;
}

/// PPP of the given density on `region`, as planar positions.
inline std::vector<Point2> sample_ppp(double density, const Region& region, Rng& rng) {
    const auto r2 = sample_ppp_r2(density, region, rng);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<Point2> points;
    points.reserve(r2.size());
    for (double v : r2) {
        const double r = std::sqrt(v), phi = angle(rng);
        points.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return points;
}

struct SimulationSettings {
    std::size_t drops = 100000;
    std::uint64_t seed = 1;
    unsigned workers = 0;        ///< 0: hardware concurrency
    double window_factor = 30.0; ///< window radius in units of 1/sqrt(pi lambda_M)
    std::size_t batch_size = 1000;
};

inline double window_radius(const NetworkConfig& cfg, const SimulationSettings& s) {
    return s.window_factor / std::sqrt(std::numbers::pi * cfg.lambda_m);
}

/**
 * One network realisation. Distances are kept squared; planar positions
 * are available through `positions` of `sample_drop`.
 */
struct Drop {
    std::vector<double> mbs_r2;
    std::vector<double> mbs_fading;  ///< |h|^2, unit-mean exponential
    std::vector<double> sbs_r2;
    std::vector<double> sbs_fading;
    std::vector<double> cluster1_r2;  ///< N1 candidates in the disk of radius a
    std::vector<double> cluster2_r2;  ///< N2 candidates in the annulus a..b
    std::vector<std::complex<double>> cluster1_gain;  ///< CN(0, 1)
    std::vector<std::complex<double>> cluster2_gain;
    std::size_t resampled = 0;  ///< MBS fields redrawn because they were empty
};

/** Planar view of a drop; angles come from an independent stream. */
struct DropPositions {
    std::vector<Point2> mbs_points;
    std::vector<Point2> sbs_points;
    std::vector<Point2> cluster1;
    std::vector<Point2> cluster2;
};

/** SIRs of one drop: MBS link and every cooperative serving count. */
struct DropSir {
    double mbs = 0.0;
    std::vector<double> bl;  ///< index n-1
    std::vector<double> el;  ///< index n-1
};

namespace detail {

inline void draw_gains(std::size_t count, Rng& rng, std::vector<std::complex<double>>& out) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    out.resize(count);
    for (auto& h : out) {
        const double re = gauss(rng);
        h = {re, gauss(rng)};
    }
}

inline void draw_fading(std::size_t count, Rng& rng, std::vector<double>& out) {
    std::exponential_distribution<double> exp1(1.0);
    out.resize(count);
    for (double& g : out) g = exp1(rng);
}

inline double path_gain(double r2, double alpha) {
    return alpha == 4.0 ? 1.0 / (r2 * r2) : std::pow(r2, -alpha / 2.0);
}

}  // namespace detail

inline void draw_drop(const NetworkConfig& cfg, double window, Rng& rng, Drop& d) {
    const Region field{0.0, window};
    d.resampled = 0;
    d.mbs_r2 = sample_ppp_r2(cfg.lambda_m, field, rng);
    while (d.mbs_r2.empty()) {
        ++d.resampled;
        d.mbs_r2 = sample_ppp_r2(cfg.lambda_m, field, rng);
    }
    detail::draw_fading(d.mbs_r2.size(), rng, d.mbs_fading);
    d.sbs_r2 = sample_ppp_r2(cfg.lambda_s, field, rng);
    detail::draw_fading(d.sbs_r2.size(), rng, d.sbs_fading);
    analytic::detail::draw_cluster_r2(cfg, Layer::base, cfg.n1, rng, d.cluster1_r2);
    detail::draw_gains(d.cluster1_r2.size(), rng, d.cluster1_gain);
    analytic::detail::draw_cluster_r2(cfg, Layer::enhancement, cfg.n2, rng, d.cluster2_r2);
    detail::draw_gains(d.cluster2_r2.size(), rng, d.cluster2_gain);
}

/// SIRs of every link of a drop.
inline DropSir drop_sir(const NetworkConfig& cfg, const Drop& d) {
    DropSir out;
    const double a2 = cfg.a * cfg.a, b2 = cfg.b * cfg.b;

    std::size_t nearest = 0;
    double mbs_total = 0.0;
    for (std::size_t i = 0; i < d.mbs_r2.size(); ++i) {
        mbs_total += d.mbs_fading[i] * cfg.p_m * detail::path_gain(d.mbs_r2[i], cfg.alpha_m);
        if (d.mbs_r2[i] < d.mbs_r2[nearest]) nearest = i;
    }
    double sbs_total = 0.0, sbs_disk = 0.0, sbs_annulus = 0.0;
    for (std::size_t i = 0; i < d.sbs_r2.size(); ++i) {
        const double r2 = d.sbs_r2[i];
        const double p = d.sbs_fading[i] * cfg.p_s * detail::path_gain(r2, cfg.alpha_s);
        sbs_total += p;
        if (r2 < a2) sbs_disk += p;
        else if (r2 < b2) sbs_annulus += p;
    }
    const double serving = d.mbs_fading[nearest] * cfg.p_m * detail::path_gain(d.mbs_r2[nearest], cfg.alpha_m);
    out.mbs = serving / (mbs_total - serving + sbs_total);

    auto cooperative = [&](const std::vector<double>& r2, const std::vector<std::complex<double>>& gain,
                           double interference, std::vector<double>& sir) {
        std::complex<double> amplitude{};
        sir.resize(r2.size());
        for (std::size_t k = 0; k < r2.size(); ++k) {
            amplitude += gain[k] * std::sqrt(cfg.p_s * detail::path_gain(r2[k], cfg.alpha_s));
            sir[k] = std::norm(amplitude) / interference;
        }
    };
    cooperative(d.cluster1_r2, d.cluster1_gain, mbs_total + sbs_total - sbs_disk, out.bl);
    cooperative(d.cluster2_r2, d.cluster2_gain, mbs_total + sbs_disk + (sbs_total - sbs_disk - sbs_annulus),
                out.el);
    return out;
}

/** Per-drop SIRs of a whole simulation run. */
struct SirTable {
    std::vector<double> mbs;              ///< [drop]
    std::vector<std::vector<double>> bl;  ///< [n-1][drop]
    std::vector<std::vector<double>> el;  ///< [n-1][drop]
    std::size_t resampled = 0;
    double window_radius = 0.0;
    std::uint64_t seed = 0;
    std::size_t batch_size = 0;

    std::size_t drops() const { return mbs.size(); }
};

inline SirTable simulate(const NetworkConfig& cfg, const SimulationSettings& settings = {}) {
    cfg.validate();
    if (settings.drops < 1) throw std::invalid_argument("simulate: need at least one drop");
    if (settings.batch_size < 1) throw std::invalid_argument("simulate: batch size must be positive");
    SirTable t;
    t.window_radius = window_radius(cfg, settings);
    t.seed = settings.seed;
    t.batch_size = settings.batch_size;
    t.mbs.resize(settings.drops);
    t.bl.assign(static_cast<std::size_t>(cfg.n1), std::vector<double>(settings.drops));
    t.el.assign(static_cast<std::size_t>(cfg.n2), std::vector<double>(settings.drops));
    const std::size_t n_batches = (settings.drops + settings.batch_size - 1) / settings.batch_size;
    std::vector<std::size_t> resampled(n_batches, 0);
    svcache::detail::for_each_batch(n_batches, settings.workers, [&](std::size_t batch) {
        Rng rng(svcache::detail::derive_seed(settings.seed, batch));
        Drop d;
        const std::size_t begin = batch * settings.batch_size;
        const std::size_t end = std::min(settings.drops, begin + settings.batch_size);
        for (std::size_t i = begin; i < end; ++i) {
            draw_drop(cfg, t.window_radius, rng, d);
            resampled[batch] += d.resampled;
            const DropSir s = drop_sir(cfg, d);
            t.mbs[i] = s.mbs;
            for (std::size_t n = 0; n < s.bl.size(); ++n) t.bl[n][i] = s.bl[n];
            for (std::size_t n = 0; n < s.el.size(); ++n) t.el[n][i] = s.el[n];
        }
    });
    for (auto r : resampled) t.resampled += r;
    return t;
}

/// Replays drop `index` of the run described by `settings`.
inline Drop sample_drop(const NetworkConfig& cfg, const SimulationSettings& settings, std::size_t index) {
    const std::size_t batch = index / settings.batch_size;
    Rng rng(svcache::detail::derive_seed(settings.seed, batch));
    Drop d;
    for (std::size_t i = batch * settings.batch_size; i <= index; ++i)
        draw_drop(cfg, window_radius(cfg, settings), rng, d);
    return d;
}

/// Planar positions for a drop, with angles from their own stream.
inline DropPositions positions(const Drop& d, std::uint64_t angle_seed) {
    Rng rng(angle_seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    auto place = [&](const std::vector<double>& r2) {
        std::vector<Point2> pts;
        pts.reserve(r2.size());
        for (double v : r2) {
            const double r = std::sqrt(v), phi = angle(rng);
            pts.push_back({r * std::cos(phi), r * std::sin(phi)});
        }
        return pts;
    };
    return {place(d.mbs_r2), place(d.sbs_r2), place(d.cluster1_r2), place(d.cluster2_r2)};
}

/// Fraction of drops whose SIR reaches gamma.
inline Estimate success_fraction(const std::vector<double>& sir, double gamma, std::uint64_t seed = 0) {
    if (sir.empty()) throw std::invalid_argument("success_fraction: no drops");
    std::size_t hits = 0;
    for (double s : sir) hits += s >= gamma ? 1 : 0;
    const double n = static_cast<double>(sir.size());
    const double p = static_cast<double>(hits) / n;
    return {p, std::sqrt(p * (1.0 - p) / n), sir.size(), seed};
}

/** Too few drops satisfied the conditioning event. */
class InsufficientSamples : public Error {
public:
    using Error::Error;
};

inline constexpr std::size_t min_conditioning_drops = 100;

/// W times the sample mean of log2(1 + SIR) over drops with SIR >= gamma.
inline Estimate conditional_rate(const std::vector<double>& sir, double gamma, double bandwidth,
                                 std::uint64_t seed = 0) {
    Moments m;
    for (double s : sir)
        if (s >= gamma) m.add(std::log2(1.0 + s));
    const auto kept = static_cast<std::size_t>(m.n);
    if (kept < min_conditioning_drops)
        throw InsufficientSamples("only " + std::to_string(kept) +
                                  " drops met the SIR threshold; raise the number of drops");
    return {bandwidth * m.mean(), bandwidth * m.std_error(), kept, seed};
}

namespace detail {

inline SimulationSettings settings_for(std::size_t n_drops, std::uint64_t seed) {
    SimulationSettings s;
    s.drops = n_drops;
    s.seed = seed;
    return s;
}

inline const std::vector<double>& cluster_sir(const SirTable& t, Layer layer, int n_serving) {
    const auto& column = layer == Layer::base ? t.bl : t.el;
    if (n_serving < 1 || static_cast<std::size_t>(n_serving) > column.size())
        throw std::invalid_argument("serving count must lie between 1 and the cluster size");
    return column[static_cast<std::size_t>(n_serving - 1)];
}

}  // namespace detail

inline Estimate estimate_p_success_mbs(const NetworkConfig& cfg, double gamma, std::size_t n_drops,
                                       std::uint64_t seed) {
    return success_fraction(simulate(cfg, detail::settings_for(n_drops, seed)).mbs, gamma, seed);
}

inline Estimate estimate_p_success_sbs(const NetworkConfig& cfg, double gamma, Layer layer, int n_serving,
                                       std::size_t n_drops, std::uint64_t seed) {
    if (n_serving < 1 || n_serving > analytic::detail::cluster_size(cfg, layer))
        throw std::invalid_argument("serving count must lie between 1 and the cluster size");
    const auto t = simulate(cfg, detail::settings_for(n_drops, seed));
    return success_fraction(detail::cluster_sir(t, layer, n_serving), gamma, seed);
}

enum class Link { mbs, sbs_base, sbs_enhancement };

struct Source {
    Link link = Link::mbs;
    int n_serving = 1;  ///< ignored for the MBS link
};

inline const std::vector<double>& link_sir(const SirTable& t, const Source& source) {
    switch (source.link) {
        case Link::mbs: return t.mbs;
        case Link::sbs_base: return detail::cluster_sir(t, Layer::base, source.n_serving);
        case Link::sbs_enhancement: return detail::cluster_sir(t, Layer::enhancement, source.n_serving);
    }
    throw std::invalid_argument("unknown link");
}

inline Estimate estimate_ergodic_rate(const NetworkConfig& cfg, double gamma, const Source& source,
                                      std::size_t n_drops, std::uint64_t seed) {
    const auto t = simulate(cfg, detail::settings_for(n_drops, seed));
    return conditional_rate(link_sir(t, source), gamma, cfg.w, seed);
}

/// Rate table with every entry replaced by its simulated conditional mean.
inline analytic::RateTable estimate_rate_table(const NetworkConfig& cfg, const SimulationSettings& settings) {
    const auto t = simulate(cfg, settings);
    analytic::RateTable table;
    table.provenance = analytic::Provenance::monte_carlo;
    table.seed = settings.seed;
    table.samples = settings.drops;
    table.r_m_bl = conditional_rate(t.mbs, cfg.gamma_bl, cfg.w).mean;
    table.r_m_el = conditional_rate(t.mbs, cfg.gamma_el, cfg.w).mean;
    for (const auto& col : t.bl) {
        const auto e = conditional_rate(col, cfg.gamma_bl, cfg.w);
        table.r_s_bl.push_back(e.mean);
        table.r_s_bl_error.push_back(e.std_error);
    }
    for (const auto& col : t.el) {
        const auto e = conditional_rate(col, cfg.gamma_el, cfg.w);
        table.r_s_el.push_back(e.mean);
        table.r_s_el_error.push_back(e.std_error);
    }
    return table;
}

/// Columnar dump: one row per drop with its batch seed and every SIR.
inline void write_dump(std::ostream& out, const SirTable& t) {
    out << "drop,batch_seed,sir_mbs";
    for (std::size_t n = 1; n <= t.bl.size(); ++n) out << ",sir_bl_n" << n;
    for (std::size_t n = 1; n <= t.el.size(); ++n) out << ",sir_el_n" << n;
    out << '\n';
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < t.drops(); ++i) {
        out << i << ',' << svcache::detail::derive_seed(t.seed, i / t.batch_size) << ',' << t.mbs[i];
        for (const auto& col : t.bl) out << ',' << col[i];
        for (const auto& col : t.el) out << ',' << col[i];
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace svcache::montecarlo
