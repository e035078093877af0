#pragma once

#include "itecal/io/assess.hpp"
#include "itecal/simulation.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>

namespace itecal::io {

// Bump when a field is renamed or removed.
inline constexpr int kReportSchemaVersion = 1;

inline nlohmann::ordered_json to_json(const TestReport& r, double alpha, bool include_bm) {
    nlohmann::ordered_json j;
    j["c_n"] = r.c_n;
    j["s_n"] = r.s_n;
    if (r.p_mean) j["p_mean"] = *r.p_mean;
    if (r.bridge_stat) j["bridge_stat"] = *r.bridge_stat;
    if (r.p_bridge) j["p_bridge"] = *r.p_bridge;
    if (r.p_unified) j["p_unified"] = *r.p_unified;
    if (include_bm) {
        j["bm_stat"] = r.bm_stat;
        j["p_bm"] = r.p_bm;
    }
    if (r.p_unified) j["reject_bridge"] = *r.p_unified < alpha;
    else if (r.p_bridge) j["reject_bridge"] = *r.p_bridge < alpha;
    if (include_bm) j["reject_bm"] = r.p_bm < alpha;
    return j;
}

inline nlohmann::ordered_json to_json(const Assessment& a) {
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["kind"] = "itecal.assessment";
    j["approach"] = to_string(a.options.approach);
    j["test"] = to_string(a.options.test);
    j["ordering"] = a.options.order_by.empty() ? std::string("delta") : a.options.order_by;
    j["alpha"] = a.options.alpha;
    j["n"] = a.n;
    j["n_control"] = a.n_control;
    j["n_treated"] = a.n_treated;
    j["tie_flag"] = a.tie_flag;
    j["warnings"] = a.warnings;
    const bool bm = a.options.test == TestChoice::Bm || a.options.test == TestChoice::Both;
    auto results = nlohmann::ordered_json::array();
    for (const auto& r : a.results) {
        nlohmann::ordered_json e;
        e["approach"] = r.approach;
        e["process"] = to_string(r.path.kind);
        e["heuristic"] = r.heuristic;
        e["report"] = to_json(r.report, a.options.alpha, bm || a.per_arm.has_value());
        results.push_back(std::move(e));
    }
    j["results"] = std::move(results);
    if (a.per_arm) {
        j["per_arm"] = {{"arm_test", a.per_arm->arm_test == ArmTest::Bridge ? "bridge" : "bm"},
                        {"p_compound", a.per_arm->p_compound},
                        {"reject", a.per_arm->p_compound < a.options.alpha}};
    }
    return j;
}

inline nlohmann::ordered_json to_json(const sim::McSummary& s) {
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["kind"] = "itecal.simulation";
    nlohmann::ordered_json sc;
    sc["set"] = s.spec.set_id;
    sc["id"] = s.spec.id;
    sc["beta"] = {{"b0", s.spec.beta.b0}, {"bx", s.spec.beta.bx}, {"ba", s.spec.beta.ba}, {"bxa", s.spec.beta.bxa}};
    if (s.spec.set_id == 2) sc["shift"] = {{"alpha", s.spec.shift.alpha}, {"gamma", s.spec.shift.gamma}};
    if (s.spec.set_id == 3) {
        sc["transform"] = {{"a0", s.spec.transform.alpha0}, {"g0", s.spec.transform.gamma0},
                           {"a1", s.spec.transform.alpha1}, {"g1", s.spec.transform.gamma1}};
    }
    sc["n"] = s.spec.n;
    sc["reps"] = s.spec.reps;
    sc["seed"] = s.spec.seed;
    sc["allocation"] = s.spec.allocation;
    j["scenario"] = std::move(sc);
    j["level"] = s.level;
    j["truth"] = {{"mean_calibration_error", s.truth.mean_error},
                  {"mean_absolute_calibration_error", s.truth.mean_absolute_error}};
    auto tests = nlohmann::ordered_json::array();
    for (const auto& t : s.tests) {
        tests.push_back({{"test", sim::to_string(t.test)},
                         {"rejections", t.rejections},
                         {"valid", t.valid},
                         {"rate", t.rate},
                         {"mc_se", t.mc_se},
                         {"ks_distance", t.ks_distance},
                         {"ecdf", t.ecdf}});
    }
    j["tests"] = std::move(tests);
    j["ecdf_grid"] = s.ecdf_grid;
    auto deg = nlohmann::ordered_json::array();
    for (const auto& d : s.degenerate) deg.push_back({{"replicate", d.replicate}, {"reason", d.reason}});
    j["degenerate"] = {{"count", s.degenerate.size()}, {"replicates", std::move(deg)}};
    return j;
}

// Aligned-column summary with the MC standard error next to every rate.
inline std::string to_table(const sim::McSummary& s) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "scenario: set %d%s%s  n=%zu  reps=%zu  seed=%llu\n", s.spec.set_id,
                  s.spec.id.empty() ? "" : " ", s.spec.id.c_str(), s.spec.n, s.spec.reps,
                  static_cast<unsigned long long>(s.spec.seed));
    out += buf;
    std::snprintf(buf, sizeof buf, "true mean calibration error % .4f   mean absolute % .4f\n", s.truth.mean_error,
                  s.truth.mean_absolute_error);
    out += buf;
    std::snprintf(buf, sizeof buf, "%-20s %8s %8s %8s %8s %8s\n", "test", "reject", "valid", "rate", "MC SE", "KS");
    out += buf;
    for (const auto& t : s.tests) {
        std::snprintf(buf, sizeof buf, "%-20s %8zu %8zu %8.4f %8.4f %8.4f\n", sim::to_string(t.test), t.rejections,
                      t.valid, t.rate, t.mc_se, t.ks_distance);
        out += buf;
    }
    if (!s.degenerate.empty()) {
        std::snprintf(buf, sizeof buf, "degenerate replicates excluded: %zu\n", s.degenerate.size());
        out += buf;
    }
    return out;
}

}  // namespace itecal::io
