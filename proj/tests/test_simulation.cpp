#include "itecal/philox.hpp"
#include "itecal/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace itecal;

namespace {

sim::Catalog load_catalog() {
    std::ifstream f(ITECAL_DEFAULT_CATALOG);
    std::ostringstream buf;
    buf << f.rdbuf();
    return sim::parse_catalog(buf.str());
}

}  // namespace

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
    using rng::Counter;
    EXPECT_EQ(rng::philox4x32({0, 0, 0, 0}, {0, 0}), (Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(rng::philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(rng::philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, UniformsStayInsideOpenInterval) {
    EXPECT_GT(rng::to_unit(0, 0), 0.0);
    EXPECT_LT(rng::to_unit(0xffffffff, 0xffffffff), 1.0);
    double sum = 0.0;
    for (std::uint32_t i = 0; i < 20000; ++i) {
        for (double u : rng::uniforms4(3, 1, i, 0)) sum += u;
    }
    EXPECT_NEAR(sum / 80000.0, 0.5, 0.005);
}

TEST(Models, ReferenceRisksAtZero) {
    sim::ScenarioSpec s;
    EXPECT_DOUBLE_EQ(sim::predicted_risk(s, 0.0, 0), 0.5);
    EXPECT_NEAR(sim::predicted_risk(s, 0.0, 1), 0.3775406687981454, 1e-15);
    EXPECT_NEAR(sim::predicted_effect(s, 0.0), 0.1224593312018546, 1e-15);
}

TEST(Models, IdentityScenariosAreCalibrated) {
    sim::ScenarioSpec s2;
    s2.set_id = 2;
    sim::ScenarioSpec s3;
    s3.set_id = 3;
    for (double x : {-2.0, -0.3, 0.0, 0.7, 3.1}) {
        for (int a : {0, 1}) {
            EXPECT_NEAR(sim::true_risk(s2, x, a), sim::predicted_risk(s2, x, a), 1e-15);
            EXPECT_NEAR(sim::true_risk(s3, x, a), sim::predicted_risk(s3, x, a), 1e-15);
        }
    }
    const auto m = sim::true_calibration_metrics(s2);
    EXPECT_NEAR(m.mean_error, 0.0, 1e-12);
    EXPECT_NEAR(m.mean_absolute_error, 0.0, 1e-12);
}

TEST(Models, TrueCalibrationMetricsMatchQuadrature) {
    const auto cat = load_catalog();
    struct Case {
        int set;
        const char* id;
        double mce;
        double mace;
    };
    // Independent adaptive Gauss-Kronrod quadrature over the normal density.
    const Case cases[] = {
        {2, "s6", -0.05722450235764224, 0.05722450235764222},
        {2, "s9", -0.003136499501698697, 0.020786371890616422},
        {2, "s1", 0.029290150134819136, 0.029418374741325828},
        {3, "s12", 0.006483280136510078, 0.041397259872471094},
        {3, "s11", 0.029456226366816444, 0.04523779036618916},
        {3, "s7", -0.04677286129555567, 0.05389437880395273},
    };
    for (const auto& c : cases) {
        const auto m = sim::true_calibration_metrics(cat.scenario(c.set, c.id));
        EXPECT_NEAR(m.mean_error, c.mce, 1e-6) << c.set << c.id;
        EXPECT_NEAR(m.mean_absolute_error, c.mace, 1e-6) << c.set << c.id;
    }
    const auto s12 = cat.scenario(3, "s12");
    for (double x : {-1.0, 0.0, 2.0}) EXPECT_NEAR(sim::true_effect(s12, x), 0.1224593312018546, 1e-15);
}

TEST(Generation, ReplicatesAreReproducibleAndDistinct) {
    sim::ScenarioSpec s;
    s.n = 50;
    s.seed = 9;
    const auto a = sim::generate_records(s, 4);
    const auto b = sim::generate_records(s, 4);
    const auto c = sim::generate_records(s, 5);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (const auto& r : a) {
        EXPECT_NEAR(r.delta, *r.pi - sim::predicted_risk(s, *r.order_key, 1), 1e-15);
    }
}

TEST(Generation, InvalidSpecs) {
    sim::ScenarioSpec s;
    s.reps = 0;
    EXPECT_THROW(s.validate(), Error);
    s.reps = 10;
    s.n = 1;
    EXPECT_THROW(s.validate(), Error);
    s.n = 10;
    s.set_id = 4;
    EXPECT_THROW(s.validate(), Error);
    s.set_id = 3;
    s.transform.gamma1 = -1.0;
    EXPECT_THROW(s.validate(), Error);
}

TEST(MonteCarlo, IndependentOfWorkerCount) {
    sim::ScenarioSpec s;
    s.n = 200;
    s.reps = 60;
    s.seed = 5;
    const auto one = sim::run_monte_carlo(s, {sim::kAllTests.begin(), sim::kAllTests.end()}, 1);
    const auto four = sim::run_monte_carlo(s, {sim::kAllTests.begin(), sim::kAllTests.end()}, 4);
    ASSERT_EQ(one.tests.size(), 4u);
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_EQ(one.tests[j].rejections, four.tests[j].rejections);
        EXPECT_EQ(one.tests[j].ecdf, four.tests[j].ecdf);
        EXPECT_EQ(one.tests[j].ks_distance, four.tests[j].ks_distance);
    }
}

TEST(MonteCarlo, DegenerateReplicatesAreExcluded) {
    // Tiny samples with extreme risks often have no events at all.
    sim::ScenarioSpec s;
    s.beta = {-6.0, 0.0, 0.0, 0.0};
    s.n = 4;
    s.reps = 50;
    const auto m = sim::run_monte_carlo(s, {sim::TestId::MarginalBridge});
    EXPECT_FALSE(m.degenerate.empty());
    EXPECT_EQ(m.tests[0].valid + m.degenerate.size(), s.reps);
}

TEST(MonteCarlo, KsDistance) {
    EXPECT_NEAR(sim::ks_distance_uniform({0.5}), 0.5, 1e-15);
    EXPECT_NEAR(sim::ks_distance_uniform({0.125, 0.375, 0.625, 0.875}), 0.125, 1e-15);
}

TEST(Catalog, ShippedFileHasAllScenarios) {
    const auto cat = load_catalog();
    std::size_t set2 = 0, set3 = 0;
    for (const auto& e : cat.entries) (e.set_id == 2 ? set2 : set3) += 1;
    EXPECT_EQ(set2, 9u);
    EXPECT_EQ(set3, 12u);
    EXPECT_DOUBLE_EQ(cat.reference.ba, -0.5);
    const auto s11 = cat.scenario(3, "s11");
    EXPECT_DOUBLE_EQ(s11.transform.gamma0, 1.5);
    EXPECT_DOUBLE_EQ(s11.transform.gamma1, 1.5);
    try {
        (void)cat.scenario(2, "s42");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownScenario);
    }
}

TEST(Catalog, ParseErrors) {
    const std::string ref = "reference b0=0 bx=1 ba=0 bxa=0\n";
    EXPECT_THROW(sim::parse_catalog("set2 s1 alpha=1 gamma=1\n"), Error);  // no reference line
    EXPECT_THROW(sim::parse_catalog(ref + "set4 x alpha=1 gamma=1\n"), Error);
    EXPECT_THROW(sim::parse_catalog(ref + "set2 s1 alpha=1\n"), Error);
    EXPECT_THROW(sim::parse_catalog(ref + "set2 s1 alpha=1 gamma=x\n"), Error);
    EXPECT_THROW(sim::parse_catalog(ref + "set2 s1 alpha=1 gamma=1 extra=2\n"), Error);
    EXPECT_THROW(sim::parse_catalog(ref + "set2 s1 alpha=1 gamma=1\nset2 s1 alpha=0 gamma=1\n"), Error);
    const auto cat = sim::parse_catalog("# comment only\n" + ref + "set2 a alpha=0.5 gamma=2  # trailing\n");
    ASSERT_EQ(cat.entries.size(), 1u);
    EXPECT_DOUBLE_EQ(cat.entries[0].shift.gamma, 2.0);
}

TEST(Catalog, ParseCell) {
    const auto m = sim::parse_cell("b0=-1,bx=0.25,ba=-1,bxa=0.25");
    EXPECT_DOUBLE_EQ(m.b0, -1.0);
    EXPECT_DOUBLE_EQ(m.ba, -1.0);
    EXPECT_THROW(sim::parse_cell("b0=-1,bx=0.25,ba=-1"), Error);
    EXPECT_THROW(sim::parse_cell("b0=-1,bx=0.25,ba=-1,bxa=0.25,bxa=1"), Error);
}
