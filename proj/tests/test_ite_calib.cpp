#include "itecal/inference.hpp"
#include "itecal/ite_calib.hpp"
#include "itecal/simulation.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace itecal;

namespace {

SubjectRecord rec(int a, int y, double d, std::optional<double> pi = std::nullopt) {
    SubjectRecord r;
    r.arm = a;
    r.outcome = y;
    r.delta = d;
    r.pi = pi;
    return r;
}

// B_k straight from its definition over the first k ordered subjects.
double benefit_by_definition(const OrderedSample& s, std::size_t k) {
    double n0 = 0, n1 = 0, y0 = 0, y1 = 0;
    for (std::size_t i = 0; i < k; ++i) {
        (s[i].arm == 0 ? n0 : n1) += 1;
        (s[i].arm == 0 ? y0 : y1) += s[i].outcome;
    }
    const double r0 = n0 > 0 ? y0 / n0 : 0.0;
    const double r1 = n1 > 0 ? y1 / n1 : 0.0;
    return static_cast<double>(k) * (r0 - r1);
}

OrderedSample random_sample(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::bernoulli_distribution coin(0.5);
    std::vector<SubjectRecord> v;
    for (std::size_t i = 0; i < n; ++i) {
        const double pi = u(gen);
        const double delta = (u(gen) - 0.5) * 0.8 * std::min(pi, 1.0 - pi);
        const int a = i < 2 ? static_cast<int>(i) : coin(gen);
        v.push_back(rec(a, coin(gen), delta, pi));
    }
    std::shuffle(v.begin(), v.end(), gen);
    return build_sample(v);
}

sim::ScenarioSpec reference_null(std::size_t n, std::uint64_t seed) {
    sim::ScenarioSpec spec;
    spec.n = n;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST(CumulativeBenefit, HandExample) {
    const auto s = build_sample({rec(0, 1, 0.1), rec(1, 1, 0.2), rec(0, 0, 0.3), rec(1, 0, 0.4)});
    const auto b = cumulative_benefit(s);
    const std::vector<double> expected{0.0, 1.0, 0.0, -1.5, 0.0};
    for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(b.b[k], expected[k], 1e-15) << k;
}

TEST(CumulativeBenefit, EmptyArmRateIsZero) {
    const auto s = build_sample({rec(1, 1, 0.1), rec(0, 0, 0.2)});
    const auto b = cumulative_benefit(s);
    EXPECT_DOUBLE_EQ(b.b[1], -1.0);
    EXPECT_DOUBLE_EQ(b.b[2], -2.0);
}

TEST(CumulativeBenefitOracle, DefinitionMatchesIncrementalReconstruction) {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = random_sample(gen, 2 + trial % 49);
        const auto series = cumulative_benefit(s);
        const auto m = conditional_moments(series, s);
        double rebuilt = 0.0;
        for (std::size_t k = 1; k <= s.size(); ++k) {
            rebuilt += m.increments[k];
            ASSERT_NEAR(rebuilt, benefit_by_definition(s, k), 1e-10) << trial << " k=" << k;
            ASSERT_NEAR(m.centered[k], m.increments[k] - m.mu[k], 1e-10) << trial << " k=" << k;
        }
    }
}

TEST(CenteredIncrement, CertainOutcomeAtBoundaryIsZero) {
    EXPECT_DOUBLE_EQ(centered_increment(1, 0, 1, 1.0, 0.0, 1.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(conditional_variance(1, 0, 1.0, 0.0, 1.0, 0.0), 0.0);
}

TEST(ConditionalProcess, TwoSubjectExample) {
    const auto s = build_sample({rec(0, 1, 0.1, 0.5), rec(1, 1, 0.2, 0.8)});
    const auto m = conditional_moments(cumulative_benefit(s), s);
    EXPECT_NEAR(m.centered[1], 0.5, 1e-15);
    EXPECT_NEAR(m.centered[2], -0.8, 1e-15);
    EXPECT_NEAR(m.sigma2[1], 0.25, 1e-15);
    EXPECT_NEAR(m.sigma2[2], 0.96, 1e-15);
    const auto p = conditional_s_process(s);
    EXPECT_NEAR(p.total_sd * p.total_sd, 1.21, 1e-14);
    EXPECT_NEAR(p.locations[1], 2 * 0.25 / 1.1, 1e-12);
    EXPECT_NEAR(p.locations[2], 2 * -0.15 / 1.1, 1e-12);
}

TEST(ConditionalProcess, Errors) {
    try {
        (void)conditional_s_process(build_sample({rec(0, 1, 0.1), rec(1, 1, 0.2)}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingBaselineRisk);
    }
    try {
        (void)conditional_s_process(build_sample({rec(0, 1, 0.0, 1.0), rec(1, 1, 0.2, 0.5)}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateVariance);
    }
}

TEST(MarginalProcess, HandExampleAndAverageEffectIdentity) {
    // Equal predictions: ties keep input order.
    const auto s = build_sample({rec(0, 1, 0.1), rec(1, 1, 0.1), rec(0, 0, 0.1), rec(1, 0, 0.1)});
    const auto series = cumulative_benefit(s);
    const auto c = marginal_cumulative_errors(series, s);
    const std::vector<double> expected{0.0, 0.225, -0.05, -0.45, -0.1};
    for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(c[k], expected[k], 1e-15) << k;
    // C_n = observed average effect minus mean prediction.
    EXPECT_NEAR(c[4], (series.control_rate(4) - series.treated_rate(4)) - 0.1, 1e-15);
}

TEST(MarginalProcess, AllZeroOutcomesAreDegenerate) {
    try {
        (void)marginal_s_process(build_sample({rec(0, 0, 0.1), rec(1, 0, 0.2), rec(0, 0, 0.3)}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateVariance);
    }
}

TEST(ProcessInvariants, TimeEndsAtOneAndScaleIdentityHolds) {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = random_sample(gen, 5 + trial % 60);
        const auto cond = conditional_s_process(s);
        for (std::size_t k = 1; k <= cond.n(); ++k) EXPECT_GT(cond.times[k], cond.times[k - 1]);
        for (const ProcessPath* p : {&cond}) {
            EXPECT_NEAR(p->times.back(), 1.0, 1e-12);
            for (std::size_t k = 0; k <= p->n(); ++k)
                EXPECT_NEAR(p->locations[k] * p->total_sd / p->n(), p->raw_errors[k], 1e-12);
        }
        try {
            const auto marg = marginal_s_process(s);
            EXPECT_NEAR(marg.times.back(), 1.0, 1e-12);
            for (std::size_t k = 0; k <= marg.n(); ++k)
                EXPECT_NEAR(marg.locations[k] * marg.total_sd / marg.n(), marg.raw_errors[k], 1e-12);
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::DegenerateVariance);
        }
    }
}

TEST(ConditionalMonteCarlo, MartingaleMeanAndVarianceAtFixedStep) {
    // Under a calibrated model C_k has mean zero and n^2 Var(C_k) = E s_k^2.
    constexpr std::size_t reps = 2000, n = 300, k = 150;
    std::vector<double> c_k, s2_k, s_n;
    for (std::size_t r = 0; r < reps; ++r) {
        const auto sample = sim::generate_replicate(reference_null(n, 41), r);
        const auto series = cumulative_benefit(sample);
        const auto m = conditional_moments(series, sample);
        const auto c = conditional_cumulative_errors(m);
        c_k.push_back(c[k] * n);
        s2_k.push_back(m.s2[k]);
        s_n.push_back(conditional_s_process(sample).terminal_location());
    }
    const double se = std::sqrt(testkit::variance(c_k) / reps);
    EXPECT_LT(std::abs(testkit::mean(c_k)), 3.0 * se);
    EXPECT_NEAR(testkit::variance(c_k) / testkit::mean(s2_k), 1.0, 0.1);
    EXPECT_NEAR(testkit::mean(s_n), 0.0, 0.07);
    EXPECT_NEAR(testkit::variance(s_n), 1.0, 0.1);
}

TEST(ConditionalMonteCarlo, PerStepMeanAndVariance) {
    constexpr std::size_t reps = 4000, n = 300;
    const std::size_t steps[] = {3, 40, 150, 299};
    std::vector<std::vector<double>> inc(4), var(4);
    for (std::size_t r = 0; r < reps; ++r) {
        const auto sample = sim::generate_replicate(reference_null(n, 47), r);
        const auto m = conditional_moments(cumulative_benefit(sample), sample);
        for (std::size_t j = 0; j < 4; ++j) {
            inc[j].push_back(m.centered[steps[j]]);
            var[j].push_back(m.sigma2[steps[j]]);
        }
    }
    for (std::size_t j = 0; j < 4; ++j) {
        const double se_mean = std::sqrt(testkit::variance(inc[j]) / reps);
        EXPECT_LT(std::abs(testkit::mean(inc[j])), 3.0 * se_mean) << steps[j];
        // E[(D-mu)^2 - sigma^2] = 0 at every step.
        std::vector<double> gap;
        for (std::size_t r = 0; r < reps; ++r) gap.push_back(inc[j][r] * inc[j][r] - var[j][r]);
        const double se_gap = std::sqrt(testkit::variance(gap) / reps);
        EXPECT_LT(std::abs(testkit::mean(gap)), 3.0 * se_gap) << steps[j];
    }
}

TEST(MarginalMonteCarlo, TracksConditionalPath) {
    constexpr std::size_t reps = 300, n = 2000;
    std::vector<double> gap;
    for (std::size_t r = 0; r < reps; ++r) {
        const auto sample = sim::generate_replicate(reference_null(n, 43), r);
        const auto cond = conditional_s_process(sample);
        const auto marg = marginal_s_process(sample);
        double d = 0.0;
        for (std::size_t k = 0; k <= n; ++k) d = std::max(d, std::abs(cond.locations[k] - marg.locations[k]));
        gap.push_back(d);
    }
    std::nth_element(gap.begin(), gap.begin() + reps / 2, gap.end());
    EXPECT_LT(gap[reps / 2], 0.75);
}
