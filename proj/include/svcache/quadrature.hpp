/**
 * @file quadrature.hpp
 * @brief Semi-infinite integration by adaptive Gauss-Kronrod pieces of
 *        geometrically growing width, truncated once the tail is negligible.
 */
#pragma once

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "config.hpp"

namespace svcache {

/** A numerical integral did not meet its accuracy target. */
class NumericError : public Error {
public:
    NumericError(const std::string& what, double value, double error_estimate)
        : Error(what + " (value " + std::to_string(value) + ", error estimate " +
                std::to_string(error_estimate) + ")"),
          value_(value),
          error_(error_estimate) {}

    double value() const noexcept { return value_; }
    double error_estimate() const noexcept { return error_; }

private:
    double value_;
    double error_;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;        ///< accumulated Gauss-Kronrod error estimate
    double upper_limit = 0.0;  ///< where the infinite range was truncated
    int pieces = 0;
};

struct TailControl {
    double first_width = 1.0;
    double rel_tail = 1e-10;  ///< stop when two consecutive pieces fall below this share
    double piece_tol = 1e-12;
    int max_pieces = 80;
    unsigned max_depth = 10;
};

/// Integral of f over [a, b] with an adaptive 21-point Gauss-Kronrod rule.
template <class F>
QuadratureResult integrate_finite(F&& f, double a, double b, double tol = 1e-12, unsigned max_depth = 12) {
    using boost::math::quadrature::gauss_kronrod;
    QuadratureResult r;
    double err = 0.0;
    r.value = gauss_kronrod<double, 21>::integrate(f, a, b, max_depth, tol, &err);
    r.error = err;
    r.upper_limit = b;
    r.pieces = 1;
    return r;
}

/**
 * Integral of a non-negative, eventually decaying f over [lower, inf).
 * Pieces double in width; the range is closed once two successive pieces
 * each contribute less than rel_tail of the running total.
 */
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double lower, const TailControl& ctl = {}) {
    using boost::math::quadrature::gauss_kronrod;
    QuadratureResult r;
    double left = lower;
    double width = ctl.first_width;
    int quiet = 0;
    for (int k = 0; k < ctl.max_pieces; ++k) {
        double err = 0.0;
        const double piece = gauss_kronrod<double, 21>::integrate(f, left, left + width, ctl.max_depth,
                                                                  ctl.piece_tol, &err);
        r.value += piece;
        r.error += err;
        left += width;
        width *= 2.0;
        r.pieces = k + 1;
        if (std::abs(piece) <= ctl.rel_tail * std::abs(r.value)) {
            if (++quiet == 2) break;
        } else {
            quiet = 0;
        }
        if (r.value == 0.0 && piece == 0.0 && k >= 1) break;
        if (k + 1 == ctl.max_pieces)
            throw NumericError("semi-infinite integral did not reach its tail tolerance", r.value, r.error);
    }
    r.upper_limit = left;
    if (!std::isfinite(r.value)) throw NumericError("non-finite integral", r.value, r.error);
    return r;
}

}  // namespace svcache
