/**
 * @file popularity.hpp
 * @brief Zipf request probabilities and SDV/HDV quality preferences.
 */
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "config.hpp"

namespace svcache {

/** Request and quality-preference model for a catalog ordered by popularity. */
struct PopularityProfile {
    std::vector<double> p;      ///< request probability of file f (index f-1)
    std::vector<double> g_sdv;  ///< preference for base-layer-only viewing
    std::vector<double> g_hdv;  ///< preference for base+enhancement viewing
};

/// Zipf law p_f = f^-alpha / sum_n n^-alpha, f = 1..F.
inline std::vector<double> zipf(int f_count, double zipf_alpha) {
    if (f_count < 1) throw std::invalid_argument("zipf: catalog size must be at least 1");
    if (!(zipf_alpha >= 0.0)) throw std::invalid_argument("zipf: skewness must be non-negative");
    std::vector<double> p(static_cast<std::size_t>(f_count));
    // Smallest terms first.
    double norm = 0.0;
    for (int f = f_count; f >= 1; --f) {
        p[f - 1] = std::pow(static_cast<double>(f), -zipf_alpha);
        norm += p[f - 1];
    }
    for (double& x : p) x /= norm;
    return p;
}

struct QualityPreference {
    double g_sdv;
    double g_hdv;
};

/// SDV preference grows linearly from 0 (most popular) to 1 (least popular).
inline QualityPreference quality_preference(int f, int f_count) {
    if (f_count < 2) throw std::invalid_argument("quality_preference: catalog needs at least two files");
    if (f < 1 || f > f_count) throw std::out_of_range("quality_preference: file index out of range");
    const double sdv = static_cast<double>(f - 1) / static_cast<double>(f_count - 1);
    return {sdv, 1.0 - sdv};
}

inline PopularityProfile make_profile(const ContentConfig& content) {
    PopularityProfile profile;
    profile.p = zipf(content.f_count, content.zipf_alpha);
    profile.g_sdv.reserve(profile.p.size());
    profile.g_hdv.reserve(profile.p.size());
    for (int f = 1; f <= content.f_count; ++f) {
        const auto pref = quality_preference(f, content.f_count);
        profile.g_sdv.push_back(pref.g_sdv);
        profile.g_hdv.push_back(pref.g_hdv);
    }
    return profile;
}

}  // namespace svcache
