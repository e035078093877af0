#pragma once

#include "itecal/domain.hpp"
#include "itecal/error.hpp"
#include "itecal/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace itecal {

enum class ArmLabel { All, ControlOnly, TreatedOnly };

// (predicted risk, outcome) pairs sorted ascending by predicted risk.
struct RiskSampleView {
    std::vector<double> predicted;
    std::vector<int> outcome;
    ArmLabel arm_label = ArmLabel::All;

    std::size_t size() const noexcept { return predicted.size(); }
};

inline RiskSampleView make_risk_view(std::span<const double> predicted, std::span<const int> outcome,
                                     ArmLabel label = ArmLabel::All) {
    if (predicted.size() != outcome.size()) {
        throw Error(ErrorCode::InvalidArgument, "risk_calib", "predicted and outcome lengths differ");
    }
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (!(predicted[i] >= 0.0 && predicted[i] <= 1.0)) {
            throw Error(ErrorCode::FieldOutOfRange, "risk_calib", "predicted risk outside [0,1]", "pi", i);
        }
        if (outcome[i] != 0 && outcome[i] != 1) {
            throw Error(ErrorCode::FieldOutOfRange, "risk_calib", "outcome must be 0 or 1", "outcome", i);
        }
    }
    std::vector<std::size_t> order(predicted.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return predicted[l] < predicted[r]; });

    RiskSampleView view;
    view.arm_label = label;
    view.predicted.reserve(order.size());
    view.outcome.reserve(order.size());
    for (std::size_t i : order) {
        view.predicted.push_back(predicted[i]);
        view.outcome.push_back(outcome[i]);
    }
    return view;
}

// Risk view of one arm (or both) of a trial sample. Control subjects are
// predicted by pi, treated subjects by pi - delta.
inline RiskSampleView make_risk_view(const OrderedSample& sample, ArmLabel label) {
    std::vector<double> predicted;
    std::vector<int> outcome;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const SubjectRecord& r = sample[i];
        if (!r.pi) {
            throw Error(ErrorCode::MissingBaselineRisk, "risk_calib", "record " + std::to_string(i) + " has no pi", "pi", i);
        }
        if ((label == ArmLabel::ControlOnly && r.arm != 0) || (label == ArmLabel::TreatedOnly && r.arm != 1)) continue;
        predicted.push_back(r.arm == 0 ? *r.pi : *r.pi - r.delta);
        outcome.push_back(r.outcome);
    }
    if (predicted.empty()) throw Error(ErrorCode::SingleArmSample, "risk_calib", "selected arm is empty");
    return make_risk_view(predicted, outcome, label);
}

// C_0..C_n with C_k = (1/n) sum_{i<=k} (Y_i - pi_i).
inline std::vector<double> risk_cumulative_errors(const RiskSampleView& view) {
    const std::size_t n = view.size();
    if (n == 0) throw Error(ErrorCode::EmptySample, "risk_calib", "empty risk view");
    std::vector<double> c(n + 1, 0.0);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        running += view.outcome[i] - view.predicted[i];
        c[i + 1] = running / static_cast<double>(n);
    }
    return c;
}

inline ProcessPath risk_s_process(const RiskSampleView& view) {
    const std::size_t n = view.size();
    ProcessPath path;
    path.kind = ProcessKind::Risk;
    path.raw_errors = risk_cumulative_errors(view);

    std::vector<double> s2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = view.predicted[i];
        if (p <= 0.0 || p >= 1.0) {
            throw Error(ErrorCode::DegenerateVariance, "risk_calib",
                        "predicted risk " + std::to_string(p) + " has zero variance", "pi", i);
        }
        s2[i + 1] = s2[i] + p * (1.0 - p);
    }
    const double total = s2[n];
    path.total_sd = std::sqrt(total);
    path.times.resize(n + 1);
    path.locations.resize(n + 1);
    path.keys.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        path.times[k] = s2[k] / total;
        path.locations[k] = static_cast<double>(n) * path.raw_errors[k] / path.total_sd;
        path.keys[k] = view.predicted[k == 0 ? 0 : k - 1];
    }
    return path;
}

enum class ArmTest { Bridge, Bm };

struct CompoundReport {
    TestReport control;
    TestReport treated;
    ArmTest arm_test = ArmTest::Bridge;
    double p_compound = 1.0;
};

// Compound null: control risks calibrated against pi and treated risks against
// pi - delta, each tested within its own arm; the two per-arm p-values are
// combined by Fisher's method.
inline CompoundReport per_arm_compound_test(const OrderedSample& sample, ArmTest arm_test = ArmTest::Bridge) {
    if (!sample.has_baseline_risk()) {
        throw Error(ErrorCode::MissingBaselineRisk, "risk_calib", "per-arm assessment needs pi on every record");
    }
    if (sample.arm_count(0) == 0 || sample.arm_count(1) == 0) {
        throw Error(ErrorCode::SingleArmSample, "risk_calib", "both arms must be populated");
    }
    auto run = [&](ArmLabel label) {
        const ProcessPath path = risk_s_process(make_risk_view(sample, label));
        return arm_test == ArmTest::Bridge ? bridge_test(path) : bm_test(path);
    };
    CompoundReport out;
    out.arm_test = arm_test;
    out.control = run(ArmLabel::ControlOnly);
    out.treated = run(ArmLabel::TreatedOnly);
    auto decision_p = [&](const TestReport& r) { return arm_test == ArmTest::Bridge ? *r.p_unified : r.p_bm; };
    out.p_compound = fisher_combine(decision_p(out.control), decision_p(out.treated));
    return out;
}

}  // namespace itecal
