#pragma once

#include "itecal/domain.hpp"
#include "itecal/error.hpp"
#include "itecal/inference.hpp"
#include "itecal/io/dataset.hpp"
#include "itecal/ite_calib.hpp"
#include "itecal/risk_calib.hpp"

#include <optional>
#include <string>
#include <vector>

namespace itecal::io {

enum class Approach { Conditional, Marginal, Both, PerArm };
enum class TestChoice { Bm, Bridge, BridgeOnly, Both };

struct AssessOptions {
    Approach approach = Approach::Conditional;
    TestChoice test = TestChoice::Bridge;
    std::string order_by;  // empty: order by predicted ITE
    double alpha = 0.05;
};

struct ApproachResult {
    std::string approach;  // conditional | marginal | control-arm | treated-arm
    ProcessPath path;
    TestReport report;
    bool heuristic = false;
};

struct Assessment {
    AssessOptions options;
    std::size_t n = 0;
    std::size_t n_control = 0;
    std::size_t n_treated = 0;
    bool tie_flag = false;
    std::vector<std::string> warnings;
    std::vector<ApproachResult> results;
    std::optional<CompoundReport> per_arm;
};

inline std::optional<Approach> parse_approach(const std::string& s) {
    if (s == "conditional") return Approach::Conditional;
    if (s == "marginal") return Approach::Marginal;
    if (s == "both") return Approach::Both;
    if (s == "per-arm") return Approach::PerArm;
    return std::nullopt;
}

inline std::optional<TestChoice> parse_test_choice(const std::string& s) {
    if (s == "bm") return TestChoice::Bm;
    if (s == "bridge") return TestChoice::Bridge;
    if (s == "bridge-only") return TestChoice::BridgeOnly;
    if (s == "both") return TestChoice::Both;
    return std::nullopt;
}

inline const char* to_string(Approach a) noexcept {
    switch (a) {
        case Approach::Conditional: return "conditional";
        case Approach::Marginal: return "marginal";
        case Approach::Both: return "both";
        case Approach::PerArm: return "per-arm";
    }
    return "unknown";
}

inline const char* to_string(TestChoice t) noexcept {
    switch (t) {
        case TestChoice::Bm: return "bm";
        case TestChoice::Bridge: return "bridge";
        case TestChoice::BridgeOnly: return "bridge-only";
        case TestChoice::Both: return "both";
    }
    return "unknown";
}

inline TestReport run_tests(const ProcessPath& path, TestChoice test) {
    switch (test) {
        case TestChoice::Bm: return bm_test(path);
        case TestChoice::BridgeOnly: return bridge_test(path, BridgeMode::BridgeOnly);
        case TestChoice::Bridge:
        case TestChoice::Both: return bridge_test(path);
    }
    return bridge_test(path);
}

// parse -> order -> process(es) -> tests. The records are expected to carry
// the ordering column already (see DatasetOptions::order_column).
inline Assessment assess(const std::vector<SubjectRecord>& records, const AssessOptions& options) {
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "cli_io", "alpha must lie in (0,1)");
    }
    const Ordering ordering = options.order_by.empty() ? Ordering::Delta : Ordering::OrderKey;
    const OrderedSample sample = build_sample(records, ordering);

    Assessment a;
    a.options = options;
    a.n = sample.size();
    a.n_control = sample.arm_count(0);
    a.n_treated = sample.arm_count(1);
    a.tie_flag = sample.tie_flag();
    if (a.tie_flag) {
        a.warnings.push_back("ties in the ordering key; tied subjects keep their input order");
    }

    if (options.approach == Approach::PerArm) {
        const ArmTest arm_test = options.test == TestChoice::Bm ? ArmTest::Bm : ArmTest::Bridge;
        a.per_arm = per_arm_compound_test(sample, arm_test);
        a.results.push_back({"control-arm", risk_s_process(make_risk_view(sample, ArmLabel::ControlOnly)),
                             a.per_arm->control, false});
        a.results.push_back({"treated-arm", risk_s_process(make_risk_view(sample, ArmLabel::TreatedOnly)),
                             a.per_arm->treated, false});
        return a;
    }

    if (options.approach == Approach::Conditional || options.approach == Approach::Both) {
        if (!sample.has_baseline_risk()) {
            throw Error(ErrorCode::MissingBaselineRisk, "ite_calib", "the conditional approach needs a pi column");
        }
        ProcessPath path = conditional_s_process(sample);
        TestReport report = run_tests(path, options.test);
        a.results.push_back({"conditional", std::move(path), report, false});
    }
    if (options.approach == Approach::Marginal || options.approach == Approach::Both) {
        ProcessPath path = marginal_s_process(sample);
        std::size_t backward = 0;
        for (std::size_t k = 1; k < path.times.size(); ++k) backward += path.times[k] < path.times[k - 1];
        TestReport report = run_tests(path, options.test);
        a.results.push_back({"marginal", std::move(path), report, true});
        a.warnings.push_back("the marginal process is a heuristic approximation; its p-values have no formal guarantee");
        if (backward > 0) {
            a.warnings.push_back("marginal process has " + std::to_string(backward) + " negative time increments");
        }
    }
    if (options.test == TestChoice::BridgeOnly) {
        a.warnings.push_back("bridge-only mode: valid only when the terminal value is zero by construction");
    }
    return a;
}

}  // namespace itecal::io
