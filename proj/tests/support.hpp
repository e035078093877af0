#pragma once

#include "itecal/itecal.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace itecal::testkit {

// Risk-only sample from logit P(Y=1) = intercept + slope * X, X ~ N(0,1),
// outcomes drawn from the same (calibrated) risks unless truth_shift != 0.
inline RiskSampleView calibrated_risk_view(std::uint64_t seed, std::uint64_t rep, std::size_t n, double intercept = -1.0,
                                           double slope = 1.0, double truth_shift = 0.0) {
    std::vector<double> pred(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto u = rng::uniforms4(seed, rep, static_cast<std::uint32_t>(i), 7);
        const double x = rng::normal_pair(u[0], u[1])[0];
        pred[i] = sim::logistic(intercept + slope * x);
        y[i] = u[2] < sim::logistic(intercept + slope * x + truth_shift) ? 1 : 0;
    }
    return make_risk_view(pred, y);
}

inline double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

}  // namespace itecal::testkit
