/**
 * @file config.hpp
 * @brief Scenario description: network, content catalog, power coefficients
 *        and caching policies, plus the flat key-value scenario file loader.
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace svcache {

/** Base class of every error raised by the library. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** Malformed scenario file or violated scenario invariant. */
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    /// Offending key (empty when the error is not tied to one key).
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/** Physical-layer constants of the two-tier network. Powers in watts. */
struct NetworkConfig {
    double lambda_m = 1.0 / (250.0 * 250.0 * std::numbers::pi);  ///< MBS density [1/m^2]
    double lambda_s = 1.0 / (100.0 * 100.0 * std::numbers::pi);  ///< SBS density [1/m^2]
    double p_m = dbm_to_watts(43.0);
    double p_s = dbm_to_watts(23.0);
    double alpha_m = 4.0;
    double alpha_s = 4.0;
    double a = 50.0;   ///< inner cluster radius [m]
    double b = 100.0;  ///< outer cluster radius [m]
    int n1 = 4;        ///< SBSs in the BL cluster (disk of radius a)
    int n2 = 4;        ///< SBSs in the EL cluster (annulus a..b)
    double w = 10e6;   ///< bandwidth [Hz]
    double gamma_bl = db_to_linear(10.0);
    double gamma_el = db_to_linear(5.0);

    void validate() const {
        auto positive = [](double v, const char* key) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be a positive finite number");
        };
        positive(lambda_m, "lambda_m");
        positive(lambda_s, "lambda_s");
        positive(p_m, "p_m");
        positive(p_s, "p_s");
        if (!(alpha_m > 2.0)) throw ConfigError("alpha_m", "path-loss exponent must exceed 2");
        if (!(alpha_s > 2.0)) throw ConfigError("alpha_s", "path-loss exponent must exceed 2");
        positive(a, "a");
        if (!(a < b) || !std::isfinite(b)) throw ConfigError("b", "cluster radii must satisfy 0 < a < b");
        if (n1 < 0) throw ConfigError("n1", "must be non-negative");
        if (n2 < 0) throw ConfigError("n2", "must be non-negative");
        positive(w, "w");
        positive(gamma_bl, "gamma_bl");
        positive(gamma_el, "gamma_el");
    }

    bool both_exponents_four() const { return alpha_m == 4.0 && alpha_s == 4.0; }
};

/** Video catalog and per-SBS storage. Sizes in bits. */
struct ContentConfig {
    int f_count = 20;
    double l_b = 100e6;
    double l_e = 200e6;
    double m_cache = 500e6;
    double zipf_alpha = 1.0;

    void validate() const {
        if (f_count < 2) throw ConfigError("f_count", "catalog needs at least two files");
        if (!(l_b >= 0.0)) throw ConfigError("l_b", "must be non-negative");
        if (!(l_e >= 0.0)) throw ConfigError("l_e", "must be non-negative");
        if (!(m_cache >= 0.0)) throw ConfigError("m_cache", "must be non-negative");
        if (!(zipf_alpha >= 0.0)) throw ConfigError("zipf_alpha", "must be non-negative");
    }

    /// Number of BL layers one SBS can store, clamped to the catalog size.
    int bl_slots() const { return slots(l_b); }
    /// Number of EL layers one SBS can store, clamped to the catalog size.
    int el_slots() const { return slots(l_e); }

private:
    int slots(double layer_bits) const {
        if (layer_bits <= 0.0) return f_count;
        const double raw = std::floor(m_cache / layer_bits);
        return static_cast<int>(std::min(raw, static_cast<double>(f_count)));
    }
};

/** Coefficients of the power consumption model. */
struct PowerCoefficients {
    double c_ca = 6.25e-12;  ///< caching [W/bit]
    double c_bh = 5e-7;      ///< backhaul [W/bit]
    double zeta_s = 4.7;
    double zeta_m = 4.7;
    double p_s_fix = 6.8;    ///< [W]
    double p_m_fix = 130.0;  ///< [W]
    /// Scheme II caching power charges EL copies at the BL size (literal
    /// reading of the published formula). Off: EL copies cost l_e bits.
    bool el_caching_uses_bl_size = false;

    void validate() const {
        const std::pair<double, const char*> fields[] = {{c_ca, "c_ca"},       {c_bh, "c_bh"},
                                                         {zeta_s, "zeta_s"},   {zeta_m, "zeta_m"},
                                                         {p_s_fix, "p_s_fix"}, {p_m_fix, "p_m_fix"}};
        for (auto [v, key] : fields)
            if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be non-negative");
    }
};

enum class CachingMode { fractional, random };

/**
 * Per-file caching decision for the BL cluster (q1) and EL cluster (q2).
 * Fractional mode stores cached fractions (Scheme I), random mode stores
 * caching probabilities (Scheme II).
 */
struct CachingPolicy {
    CachingMode mode = CachingMode::fractional;
    std::vector<double> q1;
    std::vector<double> q2;
};

/// Largest violation of the box and budget constraints (0 when feasible).
inline double feasibility_violation(const CachingPolicy& policy, const ContentConfig& content) {
    const auto f = static_cast<std::size_t>(content.f_count);
    if (policy.q1.size() != f || policy.q2.size() != f)
        throw std::invalid_argument("caching policy length does not match the catalog size");
    double worst = 0.0;
    auto check = [&](const std::vector<double>& q, int budget) {
        double sum = 0.0;
        for (double x : q) {
            worst = std::max({worst, -x, x - 1.0});
            sum += x;
        }
        worst = std::max(worst, std::abs(sum - budget));
    };
    check(policy.q1, content.bl_slots());
    check(policy.q2, content.el_slots());
    return worst;
}

inline bool is_feasible(const CachingPolicy& policy, const ContentConfig& content, double tol = 1e-9) {
    return feasibility_violation(policy, content) <= tol;
}

/** Everything a run needs, loaded from one scenario file. */
struct Scenario {
    NetworkConfig network;
    ContentConfig content;
    PowerCoefficients power;
    std::vector<std::string> warnings;

    void validate() {
        network.validate();
        content.validate();
        power.validate();
        warnings.clear();
        if (power.c_ca >= power.c_bh)
            warnings.emplace_back("c_ca >= c_bh: caching is not cheaper than backhaul delivery");
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

inline double parse_number(std::string_view text, const std::string& key) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ConfigError(key, "expected a number, got '" + std::string(text) + "'");
    return value;
}

inline int parse_count(std::string_view text, const std::string& key) {
    const double v = parse_number(text, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key, "expected an integer");
    return static_cast<int>(v);
}

inline bool parse_bool(std::string_view text, const std::string& key) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(key, "expected true/false");
}

}  // namespace detail

/**
 * Parses the flat `key = value` scenario format. Lines may carry `#`
 * comments; unspecified keys keep the reference defaults. Powers accept a
 * `_dbm` or `_w` suffix, SIR thresholds a `_db` suffix or a bare linear key.
 */
inline Scenario parse_scenario(std::string_view text) {
    std::map<std::string, std::string, std::less<>> entries;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key(detail::trim(line.substr(0, eq)));
        std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
        if (!entries.emplace(key, value).second) throw ConfigError(key, "duplicate key");
    }

    Scenario s;
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        std::string v = it->second;
        entries.erase(it);
        return v;
    };
    auto number = [&](const std::string& key, double& out) {
        if (auto v = take(key)) out = detail::parse_number(*v, key);
    };
    auto count = [&](const std::string& key, int& out) {
        if (auto v = take(key)) out = detail::parse_count(*v, key);
    };
    auto power = [&](const std::string& base, double& out) {
        auto dbm = take(base + "_dbm");
        auto w = take(base + "_w");
        if (dbm && w) throw ConfigError(base, "give either _dbm or _w, not both");
        if (dbm) out = dbm_to_watts(detail::parse_number(*dbm, base + "_dbm"));
        if (w) out = detail::parse_number(*w, base + "_w");
    };
    auto threshold = [&](const std::string& base, double& out) {
        auto db = take(base + "_db");
        auto lin = take(base);
        if (db && lin) throw ConfigError(base, "give either _db or linear, not both");
        if (db) out = db_to_linear(detail::parse_number(*db, base + "_db"));
        if (lin) out = detail::parse_number(*lin, base);
    };

    auto& n = s.network;
    number("lambda_m", n.lambda_m);
    number("lambda_s", n.lambda_s);
    power("p_m", n.p_m);
    power("p_s", n.p_s);
    number("alpha_m", n.alpha_m);
    number("alpha_s", n.alpha_s);
    number("a", n.a);
    number("b", n.b);
    count("n1", n.n1);
    count("n2", n.n2);
    number("w", n.w);
    threshold("gamma_bl", n.gamma_bl);
    threshold("gamma_el", n.gamma_el);

    auto& c = s.content;
    count("f_count", c.f_count);
    number("l_b", c.l_b);
    number("l_e", c.l_e);
    number("m_cache", c.m_cache);
    number("zipf_alpha", c.zipf_alpha);

    auto& p = s.power;
    number("c_ca", p.c_ca);
    number("c_bh", p.c_bh);
    number("zeta_s", p.zeta_s);
    number("zeta_m", p.zeta_m);
    power("p_s_fix", p.p_s_fix);
    power("p_m_fix", p.p_m_fix);
    if (auto v = take("el_caching_uses_bl_size"))
        p.el_caching_uses_bl_size = detail::parse_bool(*v, "el_caching_uses_bl_size");

    if (!entries.empty()) throw ConfigError(entries.begin()->first, "unknown key");
    s.validate();
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("", "cannot open scenario file '" + path + "'");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_scenario(buffer.str());
}

}  // namespace svcache
