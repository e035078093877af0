#pragma once

#include "itecal/domain.hpp"
#include "itecal/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace itecal {

// Smallest p-value that enters a log; anything below is treated as this.
inline constexpr double kMinPValue = 1e-300;
inline constexpr double kSeriesTolerance = 1e-14;

enum class PMethod { NormalTwoSided, Kolmogorov, SupAbsBm, Fisher4df };

struct PValue {
    double value = 1.0;
    PMethod method = PMethod::NormalTwoSided;

    double clamped() const noexcept { return std::clamp(value, kMinPValue, 1.0); }
};

namespace detail {

inline void require_nonnegative(double x, const char* what) {
    if (!(x >= 0.0)) {
        throw Error(ErrorCode::NegativeArgument, "inference", std::string(what) + " needs x >= 0, got " + std::to_string(x));
    }
}

inline double upper_normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Root of a decreasing function f on [lo, hi] with f(lo) > target > f(hi).
template <class F>
double bisect_decreasing(F&& f, double target, double lo, double hi) {
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > target) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// P(|Z| >= |z|) for standard normal Z.
inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "inference", "normal quantile needs p in (0,1)");
    }
    // Bisection on the survival side keeps the comparison well conditioned.
    return detail::bisect_decreasing([](double x) { return 1.0 - std_normal_cdf(x); }, 1.0 - p, -40.0, 40.0);
}

// P(sup_t |W(t) - t W(1)| >= x): Kolmogorov survival function.
inline double kolmogorov_sf(double x) {
    detail::require_nonnegative(x, "kolmogorov_sf");
    if (x == 0.0) return 1.0;
    if (x < 1.0) {
        // Jacobi-transformed series for the CDF converges fast for small x.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int k = 1; k < 1000; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(-odd * odd * pi2 / (8.0 * x * x));
            cdf += term;
            if (term < kSeriesTolerance) break;
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1) ? term : -term;
        if (term < kSeriesTolerance) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// P(sup_{t in [0,1]} |W(t)| >= x) for standard Brownian motion.
inline double sup_abs_bm_sf(double x) {
    detail::require_nonnegative(x, "sup_abs_bm_sf");
    if (x == 0.0) return 1.0;
    if (x <= 1.5) {
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double sum = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double odd = 2.0 * k + 1.0;
            const double term = std::exp(-odd * odd * pi2 / (8.0 * x * x)) / odd;
            sum += (k % 2 == 0) ? term : -term;
            if (term < kSeriesTolerance) break;
        }
        return std::clamp(1.0 - 4.0 / std::numbers::pi * sum, 0.0, 1.0);
    }
    // Reflection form, 4 * sum_k (-1)^k Q((2k+1)x); keeps relative accuracy in the tail.
    double sum = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double term = detail::upper_normal_tail((2.0 * k + 1.0) * x);
        sum += (k % 2 == 0) ? term : -term;
        if (term < kSeriesTolerance * std::max(sum, 1e-300)) break;
    }
    return std::clamp(4.0 * sum, 0.0, 1.0);
}

inline double kolmogorov_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "inference", "alpha must lie in (0,1)");
    }
    return detail::bisect_decreasing(kolmogorov_sf, alpha, 0.0, 10.0);
}

inline double sup_abs_bm_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "inference", "alpha must lie in (0,1)");
    }
    return detail::bisect_decreasing(sup_abs_bm_sf, alpha, 0.0, 40.0);
}

// Fisher's method for two p-values: chi-square survival with 4 degrees of
// freedom at X = -2 (ln p1 + ln p2).
inline double fisher_combine(double p1, double p2) {
    for (double p : {p1, p2}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "inference", "p-value outside [0,1]: " + std::to_string(p));
        }
    }
    const double x = -2.0 * (std::log(std::max(p1, kMinPValue)) + std::log(std::max(p2, kMinPValue)));
    return std::clamp(std::exp(-0.5 * x) * (1.0 + 0.5 * x), 0.0, 1.0);
}

inline PValue fisher_combine(PValue a, PValue b) {
    return {fisher_combine(a.clamped(), b.clamped()), PMethod::Fisher4df};
}

// max_k |S_k|; equals the scaled maximum absolute cumulative error because
// S_k = n C_k / s_n.
inline TestReport bm_test(const ProcessPath& path) {
    if (path.locations.empty()) throw Error(ErrorCode::EmptyPath, "inference", "path has no vertices");
    TestReport r;
    r.c_n = path.terminal_error();
    r.s_n = path.terminal_location();
    for (double s : path.locations) r.bm_stat = std::max(r.bm_stat, std::abs(s));
    r.p_bm = sup_abs_bm_sf(r.bm_stat);
    return r;
}

// max_k |S_k - t_k S_n| using the realized time values.
inline double bridge_statistic(const ProcessPath& path) {
    const double s_n = path.terminal_location();
    double stat = 0.0;
    for (std::size_t k = 0; k < path.locations.size(); ++k) {
        stat = std::max(stat, std::abs(path.locations[k] - path.times[k] * s_n));
    }
    return stat;
}

enum class BridgeMode { TwoPart, BridgeOnly };

// Two-part test: S_n against Normal(0,1) and the bridged maximum against the
// Kolmogorov distribution, combined by Fisher's method. BridgeOnly is for
// recalibrated models whose terminal value is zero by construction; it leaves
// p_unified empty and p_bridge is the decision p-value.
inline TestReport bridge_test(const ProcessPath& path, BridgeMode mode = BridgeMode::TwoPart) {
    TestReport r = bm_test(path);
    r.p_mean = normal_two_sided_p(r.s_n);
    r.bridge_stat = bridge_statistic(path);
    r.p_bridge = kolmogorov_sf(*r.bridge_stat);
    if (mode == BridgeMode::TwoPart) r.p_unified = fisher_combine(*r.p_mean, *r.p_bridge);
    return r;
}

}  // namespace itecal
