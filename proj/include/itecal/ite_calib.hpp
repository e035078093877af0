#pragma once

#include "itecal/domain.hpp"
#include "itecal/error.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace itecal {

namespace detail {

// Ratios with an empty denominator are zero (0/0 = 0 convention).
inline double ratio(double num, double den) noexcept { return den == 0.0 ? 0.0 : num / den; }

}  // namespace detail

// B_k = k * (control event rate - treated event rate) among the first k
// subjects, with the running arm tallies it is built from. Every vector has
// n+1 entries and starts at 0.
struct BenefitSeries {
    std::vector<double> b;
    std::vector<double> n0;
    std::vector<double> n1;
    std::vector<double> y0;
    std::vector<double> y1;

    std::size_t n() const noexcept { return b.size() - 1; }
    double control_rate(std::size_t k) const { return detail::ratio(y0[k], n0[k]); }
    double treated_rate(std::size_t k) const { return detail::ratio(y1[k], n1[k]); }
};

inline BenefitSeries cumulative_benefit(const OrderedSample& sample) {
    const std::size_t n = sample.size();
    BenefitSeries s;
    s.b.assign(n + 1, 0.0);
    s.n0.assign(n + 1, 0.0);
    s.n1.assign(n + 1, 0.0);
    s.y0.assign(n + 1, 0.0);
    s.y1.assign(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const SubjectRecord& r = sample[k - 1];
        s.n0[k] = s.n0[k - 1] + (1 - r.arm);
        s.n1[k] = s.n1[k - 1] + r.arm;
        s.y0[k] = s.y0[k - 1] + (1 - r.arm) * r.outcome;
        s.y1[k] = s.y1[k - 1] + r.arm * r.outcome;
        s.b[k] = static_cast<double>(k) * (s.control_rate(k) - s.treated_rate(k));
    }
    return s;
}

// D_k - mu_k written directly in terms of the k-th subject. n0_k and n1_k are
// the arm counts including subject k. Under the null the true baseline risk
// and effect are replaced by their predictions pi and delta.
inline double centered_increment(std::size_t k, int arm, int outcome, double pi, double delta, double n0_k,
                                 double n1_k) noexcept {
    const double kk = static_cast<double>(k);
    const double y = outcome;
    return kk * ((1 - arm) * detail::ratio(y - pi, n0_k) - arm * detail::ratio(y - pi + delta, n1_k));
}

inline double conditional_variance(std::size_t k, int arm, double pi, double delta, double n0_k, double n1_k) noexcept {
    const double kk = static_cast<double>(k);
    const double treated = pi - delta;
    return kk * kk *
           ((1 - arm) * detail::ratio(pi * (1.0 - pi), n0_k * n0_k) +
            arm * detail::ratio(treated * (1.0 - treated), n1_k * n1_k));
}

// Per-step moments of the benefit process given the history. `increments`
// (D_k) and `mu` follow the incremental arm-wise formulas; `centered` is the
// closed form D_k - mu_k. Index 0 is a zero placeholder in every vector.
struct ConditionalMoments {
    std::vector<double> increments;
    std::vector<double> mu;
    std::vector<double> centered;
    std::vector<double> sigma2;
    std::vector<double> s2;
};

// D_k = B_k - B_{k-1} expressed through the arm tallies at k-1 and k.
// The treated-arm numerator is sum a_i Y_i (the control-arm symmetry and the
// definition of B_k fix it).
inline double benefit_increment(const BenefitSeries& s, std::size_t k, int arm) {
    const double kk = static_cast<double>(k);
    const double r0_prev = s.control_rate(k - 1);
    const double r1_prev = s.treated_rate(k - 1);
    if (arm == 0) return kk * s.control_rate(k) - (kk - 1.0) * r0_prev - r1_prev;
    return r0_prev - (kk * s.treated_rate(k) - (kk - 1.0) * r1_prev);
}

inline double increment_mean(const BenefitSeries& s, std::size_t k, int arm, double pi, double delta) {
    const double kk = static_cast<double>(k);
    const double r0_prev = s.control_rate(k - 1);
    const double r1_prev = s.treated_rate(k - 1);
    if (arm == 0) return kk * detail::ratio(s.y0[k - 1] + pi, s.n0[k]) - (kk - 1.0) * r0_prev - r1_prev;
    return r0_prev - (kk * detail::ratio(s.y1[k - 1] + (pi - delta), s.n1[k]) - (kk - 1.0) * r1_prev);
}

inline ConditionalMoments conditional_moments(const BenefitSeries& series, const OrderedSample& sample) {
    const std::size_t n = sample.size();
    if (series.n() != n) throw Error(ErrorCode::InvalidArgument, "ite_calib", "series and sample sizes differ");

    ConditionalMoments m;
    m.increments.assign(n + 1, 0.0);
    m.mu.assign(n + 1, 0.0);
    m.centered.assign(n + 1, 0.0);
    m.sigma2.assign(n + 1, 0.0);
    m.s2.assign(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const SubjectRecord& r = sample[k - 1];
        if (!r.pi) {
            throw Error(ErrorCode::MissingBaselineRisk, "ite_calib",
                        "conditional approach needs pi; missing at position " + std::to_string(k), "pi", k - 1);
        }
        const double pi = *r.pi;
        const double arm_risk = r.arm == 0 ? pi : pi - r.delta;
        if (arm_risk <= 0.0 || arm_risk >= 1.0) {
            throw Error(ErrorCode::DegenerateVariance, "ite_calib",
                        std::string(r.arm == 0 ? "pi" : "pi - delta") + " is 0 or 1 at position " + std::to_string(k),
                        "pi", k - 1);
        }
        m.increments[k] = benefit_increment(series, k, r.arm);
        m.mu[k] = increment_mean(series, k, r.arm, pi, r.delta);
        m.centered[k] = centered_increment(k, r.arm, r.outcome, pi, r.delta, series.n0[k], series.n1[k]);
        m.sigma2[k] = conditional_variance(k, r.arm, pi, r.delta, series.n0[k], series.n1[k]);
        m.s2[k] = m.s2[k - 1] + m.sigma2[k];
    }
    return m;
}

namespace detail {

inline ProcessPath standardize(ProcessKind kind, const OrderedSample& sample, std::vector<double> raw_errors,
                               const std::vector<double>& variance) {
    const std::size_t n = sample.size();
    const double total = variance[n];
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw Error(ErrorCode::DegenerateVariance, "ite_calib",
                    std::string("total variance of the ") + to_string(kind) + " process is zero");
    }
    ProcessPath path;
    path.kind = kind;
    path.raw_errors = std::move(raw_errors);
    path.total_sd = std::sqrt(total);
    path.times.resize(n + 1);
    path.locations.resize(n + 1);
    path.keys.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        path.times[k] = variance[k] / total;
        path.locations[k] = static_cast<double>(n) * path.raw_errors[k] / path.total_sd;
        path.keys[k] = sample.key(k == 0 ? 0 : k - 1);
    }
    return path;
}

}  // namespace detail

// C_k = (1/n) sum_{i<=k} (D_i - mu_i) with predicted risks standing in for the
// true baseline risks.
inline std::vector<double> conditional_cumulative_errors(const ConditionalMoments& m) {
    const std::size_t n = m.centered.size() - 1;
    std::vector<double> c(n + 1, 0.0);
    double running = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        running += m.centered[k];
        c[k] = running / static_cast<double>(n);
    }
    return c;
}

inline ProcessPath conditional_s_process(const OrderedSample& sample) {
    const BenefitSeries series = cumulative_benefit(sample);
    const ConditionalMoments m = conditional_moments(series, sample);
    return detail::standardize(ProcessKind::IteConditional, sample, conditional_cumulative_errors(m), m.s2);
}

// (B_k - sum_{i<=k} delta_i) / n.
inline std::vector<double> marginal_cumulative_errors(const BenefitSeries& series, const OrderedSample& sample) {
    const std::size_t n = sample.size();
    std::vector<double> c(n + 1, 0.0);
    double delta_sum = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        delta_sum += sample[k - 1].delta;
        c[k] = (series.b[k] - delta_sum) / static_cast<double>(n);
    }
    return c;
}

// Var(B_k) = k^2 (p0(1-p0)/n0_k + p1(1-p1)/n1_k) from running arm event rates;
// an empty arm contributes zero. Not monotone in k in general.
inline std::vector<double> marginal_variances(const BenefitSeries& series) {
    const std::size_t n = series.n();
    std::vector<double> v(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const double p0 = series.control_rate(k);
        const double p1 = series.treated_rate(k);
        const double kk = static_cast<double>(k);
        v[k] = kk * kk * (detail::ratio(p0 * (1.0 - p0), series.n0[k]) + detail::ratio(p1 * (1.0 - p1), series.n1[k]));
    }
    return v;
}

// Heuristic process that needs only predicted effects. Its time axis ends at 1
// but may step backwards; the realized values are kept.
inline ProcessPath marginal_s_process(const OrderedSample& sample) {
    const BenefitSeries series = cumulative_benefit(sample);
    return detail::standardize(ProcessKind::IteMarginal, sample, marginal_cumulative_errors(series, sample),
                               marginal_variances(series));
}

}  // namespace itecal
