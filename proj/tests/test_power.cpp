// Slow Monte Carlo properties at n = 10000 (label "slow").

#include "itecal/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

using namespace itecal;

namespace {

constexpr std::size_t kReps = 1000;
constexpr std::size_t kN = 10000;

sim::Catalog catalog() {
    std::ifstream f(ITECAL_DEFAULT_CATALOG);
    std::ostringstream buf;
    buf << f.rdbuf();
    return sim::parse_catalog(buf.str());
}

sim::McSummary run(int set, const std::string& id) {
    auto spec = catalog().scenario(set, id);
    spec.n = kN;
    spec.reps = kReps;
    spec.seed = 2718;
    return sim::run_monte_carlo(spec, {sim::kAllTests.begin(), sim::kAllTests.end()},
                                std::max(1u, std::thread::hardware_concurrency()));
}

double rate(const sim::McSummary& s, sim::TestId t) {
    for (const auto& r : s.tests) {
        if (r.test == t) return r.rate;
    }
    return std::nan("");
}

double se(const sim::McSummary& s, sim::TestId t) {
    for (const auto& r : s.tests) {
        if (r.test == t) return r.mc_se;
    }
    return std::nan("");
}

}  // namespace

TEST(PowerProperties, ConditionalAndMarginalAgreeOnLogitShifts) {
    for (int i = 1; i <= 9; ++i) {
        const std::string id = "s" + std::to_string(i);
        const auto s = run(2, id);
        EXPECT_LE(std::abs(rate(s, sim::TestId::ConditionalBm) - rate(s, sim::TestId::MarginalBm)), 0.05) << id;
        EXPECT_LE(std::abs(rate(s, sim::TestId::ConditionalBridge) - rate(s, sim::TestId::MarginalBridge)), 0.05) << id;
    }
}

TEST(PowerProperties, BridgeNotWorseThanBmOnNonlinearTruths) {
    for (const char* id : {"s7", "s9", "s10", "s11", "s12"}) {
        const auto s = run(3, id);
        for (auto [bridge, bm] : {std::pair{sim::TestId::ConditionalBridge, sim::TestId::ConditionalBm},
                                  std::pair{sim::TestId::MarginalBridge, sim::TestId::MarginalBm}}) {
            const double slack = 2.0 * std::hypot(se(s, bridge), se(s, bm));
            EXPECT_GE(rate(s, bridge), rate(s, bm) - slack) << id << " " << sim::to_string(bridge);
        }
    }
}
