/**
 * @file optimizer.hpp
 * @brief Projected gradient ascent with diminishing steps over the capped
 *        simplex {0 <= x <= 1, sum x = budget}.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "detail/parallel.hpp"
#include "objective.hpp"
#include "popularity.hpp"

namespace svcache {

struct Projection {
    std::vector<double> x;
    double threshold = 0.0;  ///< u such that x = min(max(v - u, 0), 1)
};

/**
 * Euclidean projection of v onto the capped simplex with the given budget.
 * The threshold is bracketed in [min(v) - 1, max(v)] and bisected to width
 * 1e-12; the final value is then solved exactly on the set of entries that
 * are strictly inside the box.
 */
inline Projection project_capped_simplex(const std::vector<double>& v, double budget) {
    const auto n = static_cast<double>(v.size());
    if (!(budget >= 0.0 && budget <= n)) throw std::invalid_argument("projection budget must lie in [0, F]");
    if (v.empty()) return {};
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("projection input must be finite");

    auto clipped_sum = [&](double u) {
        double s = 0.0;
        for (double x : v) s += std::clamp(x - u, 0.0, 1.0);
        return s;
    };
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    double lo = *mn - 1.0, hi = *mx;  // clipped_sum(lo) = n, clipped_sum(hi) = 0
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (clipped_sum(mid) > budget ? lo : hi) = mid;
    }
    double u = 0.5 * (lo + hi);

    // Exact refinement: with the saturated set fixed, the threshold is linear.
    double free_sum = 0.0, ones = 0.0, free_count = 0.0;
    for (double x : v) {
        const double y = x - u;
        if (y >= 1.0) ones += 1.0;
        else if (y > 0.0) {
            free_sum += x;
            free_count += 1.0;
        }
    }
    if (free_count > 0.0) {
        const double exact = (free_sum - (budget - ones)) / free_count;
        if (std::abs(exact - u) <= 1e-9) u = exact;
    }

    Projection p;
    p.threshold = u;
    p.x.reserve(v.size());
    for (double x : v) p.x.push_back(std::clamp(x - u, 0.0, 1.0));
    return p;
}

enum class InitKind { uniform, popularity, random };

/// A feasible starting point for either caching scheme.
inline CachingPolicy make_initial_policy(InitKind kind, const ContentConfig& content, std::uint64_t seed = 1,
                                         CachingMode mode = CachingMode::fractional) {
    content.validate();
    const int f = content.f_count;
    const double mb = content.bl_slots(), me = content.el_slots();
    CachingPolicy policy;
    policy.mode = mode;
    std::vector<double> w(static_cast<std::size_t>(f));
    switch (kind) {
        case InitKind::uniform:
            std::fill(w.begin(), w.end(), 1.0);
            break;
        case InitKind::popularity:
            w = zipf(f, content.zipf_alpha);
            break;
        case InitKind::random: {
            detail::Rng rng(detail::derive_seed(seed, 0));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (double& x : w) x = unit(rng);
            break;
        }
    }
    double total = 0.0;
    for (double x : w) total += x;
    auto scaled = [&](double budget) {
        std::vector<double> q(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) q[i] = total > 0.0 ? budget * w[i] / total : budget / f;
        // Proportional shares can exceed one when the weights are skewed.
        return project_capped_simplex(q, budget).x;
    };
    policy.q1 = scaled(mb);
    policy.q2 = scaled(me);
    return policy;
}

/**
 * Units of the gradient that the c/t step multiplies. With `absolute` the
 * gradient is in bit/J per unit of policy, typically 1e4 or more, so every
 * step lands on a vertex of the feasible set.
 */
enum class GradientScale {
    relative,  ///< gradient of EE divided by the current EE (ascent on log EE)
    absolute,  ///< raw gradient in bit/J per unit of policy
};

struct SolverSettings {
    int max_iters = 500;
    double rel_tol = 1e-6;
    double theta = 0.01;  ///< overrides the context's smoothing parameter
    std::uint64_t seed = 1;
    GradientScale scale = GradientScale::relative;
    double step_gain = 50.0;  ///< c in the step rule c / t

    void validate() const {
        if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
        if (!(rel_tol >= 0.0)) throw std::invalid_argument("rel_tol must be non-negative");
        if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
        if (!(step_gain > 0.0)) throw std::invalid_argument("step_gain must be positive");
    }
};

struct TraceRow {
    int iteration = 0;
    double ee = 0.0;        ///< objective used for stepping
    double ee_exact = 0.0;  ///< exact-indicator value (equal to ee for Scheme II)
    double step = 0.0;
    double u = 0.0;  ///< threshold of the first block's projection
    double v = 0.0;  ///< threshold of the second block's projection
    double max_delta = 0.0;
    double violation = 0.0;  ///< largest box or budget violation of the iterate
};

enum class Termination { converged, max_iterations };

inline const char* to_string(Termination t) {
    return t == Termination::converged ? "converged" : "max_iterations";
}

struct SolverTrace {
    double initial_ee = 0.0;
    double initial_ee_exact = 0.0;
    std::vector<TraceRow> rows;
    Termination reason = Termination::max_iterations;
};

struct SolverResult {
    CachingPolicy policy;       ///< last iterate
    CachingPolicy best_policy;  ///< iterate with the largest reported EE
    double ee = 0.0;
    double ee_exact = 0.0;
    double best_ee = 0.0;  ///< reported EE of best_policy
    SolverTrace trace;

    bool converged() const { return trace.reason == Termination::converged; }
};

/**
 * Maximizes energy efficiency from a feasible starting policy. Each
 * iteration steps the first block along its (scaled) gradient with step c/t
 * and projects, then does the same for the second block at the updated first
 * block. The run stops when the reported EE changes by less than rel_tol
 * relative, where the reported EE is the exact-indicator value for Scheme I.
 */
inline SolverResult optimize(const CachingPolicy& initial, ObjectiveContext ctx, const SolverSettings& settings = {}) {
    settings.validate();
    ctx.theta = settings.theta;
    ctx.validate();
    const double violation = feasibility_violation(initial, ctx.content);
    if (violation > 1e-9)
        throw std::invalid_argument("initial policy is infeasible (violation " + std::to_string(violation) +
                                    "); project it with project_capped_simplex first");

    const double mb = ctx.content.bl_slots(), me = ctx.content.el_slots();
    SolverResult result;
    result.policy = initial;
    double reported = ee_exact(initial, ctx);
    result.trace.initial_ee = ee_value(initial, ctx);
    result.trace.initial_ee_exact = reported;
    result.best_policy = initial;
    result.best_ee = reported;

    CachingPolicy& x = result.policy;
    for (int t = 1; t <= settings.max_iters; ++t) {
        const double step = settings.step_gain / t;
        TraceRow row;
        row.iteration = t;
        row.step = step;

        auto advance = [&](Block which, double budget) {
            auto& q = which == Block::first ? x.q1 : x.q2;
            const auto grad = ee_gradient(x, ctx, which);
            double unit = 1.0;
            if (settings.scale == GradientScale::relative) unit = ee_value(x, ctx);
            std::vector<double> moved(q.size());
            for (std::size_t f = 0; f < q.size(); ++f) moved[f] = q[f] + step * grad[f] / unit;
            auto proj = project_capped_simplex(moved, budget);
            for (std::size_t f = 0; f < q.size(); ++f) row.max_delta = std::max(row.max_delta, std::abs(proj.x[f] - q[f]));
            q = std::move(proj.x);
            return proj.threshold;
        };
        row.u = advance(Block::first, mb);
        row.v = advance(Block::second, me);

        row.ee = ee_value(x, ctx);
        row.ee_exact = ee_exact(x, ctx);
        row.violation = feasibility_violation(x, ctx.content);
        result.trace.rows.push_back(row);
        if (row.ee_exact > result.best_ee) {
            result.best_ee = row.ee_exact;
            result.best_policy = x;
        }
        const double change = std::abs(row.ee_exact - reported) / std::max(std::abs(reported), 1e-300);
        reported = row.ee_exact;
        if (change < settings.rel_tol) {
            result.trace.reason = Termination::converged;
            break;
        }
    }
    result.ee = ee_value(x, ctx);
    result.ee_exact = ee_exact(x, ctx);
    return result;
}

/// Writes the trace as CSV with a header row.
inline void write_trace_csv(std::ostream& os, const SolverTrace& trace) {
    os << "iteration,ee,ee_exact,step,u,v,max_delta,violation\n";
    const auto old_precision = os.precision(17);
    os << 0 << ',' << trace.initial_ee << ',' << trace.initial_ee_exact << ",0,0,0,0,0\n";
    for (const auto& r : trace.rows)
        os << r.iteration << ',' << r.ee << ',' << r.ee_exact << ',' << r.step << ',' << r.u << ',' << r.v << ','
           << r.max_delta << ',' << r.violation << '\n';
    os.precision(old_precision);
}

}  // namespace svcache
