#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace svcache {

/** Sample mean with its standard error. */
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

/// Running first and second moments, mergeable in a fixed order.
struct Moments {
    double n = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        n += 1.0;
        sum += x;
        sum_sq += x * x;
    }
    void merge(const Moments& o) {
        n += o.n;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    double mean() const { return n > 0.0 ? sum / n : 0.0; }
    double variance() const {
        if (n < 2.0) return 0.0;
        const double m = mean();
        return std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
    }
    double std_error() const { return n > 0.0 ? std::sqrt(variance() / n) : 0.0; }
};

}  // namespace svcache
