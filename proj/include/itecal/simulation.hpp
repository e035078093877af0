#pragma once

#include "itecal/domain.hpp"
#include "itecal/error.hpp"
#include "itecal/inference.hpp"
#include "itecal/ite_calib.hpp"
#include "itecal/philox.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace itecal::sim {

// logit(pi_a(x)) = b0 + bx x + ba a + bxa x a
struct ReferenceModel {
    double b0 = 0.0;
    double bx = 0.25;
    double ba = -0.5;
    double bxa = 0.25;

    double linear_predictor(double x, int arm) const noexcept { return b0 + bx * x + (ba + bxa * x) * arm; }
};

// Set 2 truth among the treated: b0 + bx x + alpha + gamma (ba + bxa x).
struct LogitShift {
    double alpha = 0.0;
    double gamma = 1.0;
};

// Set 3 truth per arm: alpha_a + gamma_a sign(L) |L|^gamma_a with L the
// predicted logit for that arm.
struct PowerTransform {
    double alpha0 = 0.0;
    double gamma0 = 1.0;
    double alpha1 = 0.0;
    double gamma1 = 1.0;
};

struct ScenarioSpec {
    int set_id = 1;
    std::string id;
    ReferenceModel beta;
    LogitShift shift;
    PowerTransform transform;
    std::size_t n = 500;
    std::size_t reps = 2000;
    std::uint64_t seed = 1;
    double allocation = 0.5;

    void validate() const {
        auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "simulation", what); };
        if (set_id < 1 || set_id > 3) bad("set must be 1, 2 or 3");
        if (n < 2) bad("n must be at least 2");
        if (reps < 1) bad("replicate count must be at least 1");
        if (!(allocation > 0.0 && allocation < 1.0)) bad("allocation probability must lie in (0,1)");
        for (double v : {beta.b0, beta.bx, beta.ba, beta.bxa, shift.alpha, shift.gamma, transform.alpha0,
                         transform.gamma0, transform.alpha1, transform.gamma1}) {
            if (!std::isfinite(v)) bad("model parameters must be finite");
        }
        if (transform.gamma0 < 0.0 || transform.gamma1 < 0.0) bad("power-transform exponents must be >= 0");
    }
};

inline double logistic(double eta) noexcept {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

inline double predicted_risk(const ScenarioSpec& s, double x, int arm) noexcept {
    return logistic(s.beta.linear_predictor(x, arm));
}

inline double predicted_effect(const ScenarioSpec& s, double x) noexcept {
    return predicted_risk(s, x, 0) - predicted_risk(s, x, 1);
}

inline double true_risk(const ScenarioSpec& s, double x, int arm) noexcept {
    switch (s.set_id) {
        case 2:
            if (arm == 0) return predicted_risk(s, x, 0);
            return logistic(s.beta.b0 + s.beta.bx * x + s.shift.alpha + s.shift.gamma * (s.beta.ba + s.beta.bxa * x));
        case 3: {
            const double eta = s.beta.linear_predictor(x, arm);
            const double alpha = arm == 0 ? s.transform.alpha0 : s.transform.alpha1;
            const double gamma = arm == 0 ? s.transform.gamma0 : s.transform.gamma1;
            const double sign = eta > 0.0 ? 1.0 : (eta < 0.0 ? -1.0 : 0.0);
            return logistic(alpha + gamma * sign * std::pow(std::abs(eta), gamma));
        }
        default:
            return predicted_risk(s, x, arm);
    }
}

inline double true_effect(const ScenarioSpec& s, double x) noexcept { return true_risk(s, x, 0) - true_risk(s, x, 1); }

// Subject i of replicate r draws from its own counter block, so replicates
// are reproducible in isolation and in any order.
inline std::vector<SubjectRecord> generate_records(const ScenarioSpec& spec, std::uint64_t replicate) {
    std::vector<SubjectRecord> out;
    out.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto u = rng::uniforms4(spec.seed, replicate, static_cast<std::uint32_t>(i), 0);
        const double x = rng::normal_pair(u[0], u[1])[0];
        const int arm = u[2] < spec.allocation ? 1 : 0;
        const double pi0 = predicted_risk(spec, x, 0);
        const double pi1 = predicted_risk(spec, x, 1);
        SubjectRecord r;
        r.arm = arm;
        r.outcome = u[3] < true_risk(spec, x, arm) ? 1 : 0;
        r.delta = pi0 - pi1;
        r.pi = pi0;
        r.order_key = x;
        out.push_back(r);
    }
    return out;
}

inline OrderedSample generate_replicate(const ScenarioSpec& spec, std::uint64_t replicate) {
    spec.validate();
    return build_sample(generate_records(spec, replicate), Ordering::Delta);
}

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson(F& f, double a, double b, double fa, double fm, double fb, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

// Integral of f(x) phi(x) over the real line, truncated at |x| = 12.
template <class F>
double normal_expectation(F&& g) {
    auto f = [&](double x) { return g(x) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
    constexpr int pieces = 48;
    constexpr double lo = -12.0;
    constexpr double hi = 12.0;
    double total = 0.0;
    for (int i = 0; i < pieces; ++i) {
        const double a = lo + (hi - lo) * i / pieces;
        const double b = lo + (hi - lo) * (i + 1) / pieces;
        const double fa = f(a);
        const double fm = f(0.5 * (a + b));
        const double fb = f(b);
        total += adaptive_simpson(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), 1e-12, 40);
    }
    return total;
}

}  // namespace detail

struct CalibrationMetrics {
    double mean_error = 0.0;           // E(delta* - delta)
    double mean_absolute_error = 0.0;  // E|delta* - delta|
};

inline CalibrationMetrics true_calibration_metrics(const ScenarioSpec& spec) {
    spec.validate();
    auto gap = [&](double x) { return true_effect(spec, x) - predicted_effect(spec, x); };
    return {detail::normal_expectation(gap), detail::normal_expectation([&](double x) { return std::abs(gap(x)); })};
}

enum class TestId { ConditionalBm, ConditionalBridge, MarginalBm, MarginalBridge };

inline constexpr std::array<TestId, 4> kAllTests = {TestId::ConditionalBm, TestId::ConditionalBridge, TestId::MarginalBm,
                                                   TestId::MarginalBridge};

inline const char* to_string(TestId t) noexcept {
    switch (t) {
        case TestId::ConditionalBm: return "conditional-bm";
        case TestId::ConditionalBridge: return "conditional-bridge";
        case TestId::MarginalBm: return "marginal-bm";
        case TestId::MarginalBridge: return "marginal-bridge";
    }
    return "unknown";
}

struct TestSummary {
    TestId test = TestId::ConditionalBm;
    std::size_t rejections = 0;
    std::size_t valid = 0;
    double rate = 0.0;
    double mc_se = 0.0;
    double ks_distance = 0.0;   // sup |ECDF(u) - u| over the p-values
    std::vector<double> ecdf;   // at McSummary::ecdf_grid
};

struct DegenerateReplicate {
    std::size_t replicate = 0;
    std::string reason;
};

struct McSummary {
    ScenarioSpec spec;
    double level = 0.05;
    CalibrationMetrics truth;
    std::vector<double> ecdf_grid;
    std::vector<TestSummary> tests;
    std::vector<DegenerateReplicate> degenerate;
};

// p-values of the selected tests for one replicate, in selection order.
inline std::vector<double> replicate_p_values(const OrderedSample& sample, const std::vector<TestId>& tests) {
    std::optional<ProcessPath> conditional;
    std::optional<ProcessPath> marginal;
    std::vector<double> out;
    out.reserve(tests.size());
    for (TestId t : tests) {
        const bool cond = t == TestId::ConditionalBm || t == TestId::ConditionalBridge;
        std::optional<ProcessPath>& slot = cond ? conditional : marginal;
        if (!slot) slot = cond ? conditional_s_process(sample) : marginal_s_process(sample);
        const bool bm = t == TestId::ConditionalBm || t == TestId::MarginalBm;
        out.push_back(bm ? bm_test(*slot).p_bm : *bridge_test(*slot).p_unified);
    }
    return out;
}

// Runs `count` jobs on `workers` threads; job i writes only its own slot, so
// results do not depend on scheduling.
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline std::vector<double> default_ecdf_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) grid.push_back(i / 100.0);
    return grid;
}

inline double ks_distance_uniform(std::vector<double> p) {
    std::sort(p.begin(), p.end());
    const double m = static_cast<double>(p.size());
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        d = std::max({d, (i + 1) / m - p[i], p[i] - i / m});
    }
    return d;
}

inline McSummary run_monte_carlo(const ScenarioSpec& spec, const std::vector<TestId>& tests = {kAllTests.begin(), kAllTests.end()},
                                 unsigned workers = 1, double level = 0.05) {
    spec.validate();
    if (tests.empty()) throw Error(ErrorCode::InvalidArgument, "simulation", "no tests selected");

    struct Outcome {
        std::vector<double> p;
        std::string failure;
    };
    std::vector<Outcome> outcomes(spec.reps);
    parallel_for(spec.reps, workers, [&](std::size_t r) {
        try {
            outcomes[r].p = replicate_p_values(generate_replicate(spec, r), tests);
        } catch (const Error& e) {
            outcomes[r].failure = e.what();
        }
    });

    McSummary s;
    s.spec = spec;
    s.level = level;
    s.truth = true_calibration_metrics(spec);
    s.ecdf_grid = default_ecdf_grid();
    std::vector<std::vector<double>> per_test(tests.size());
    for (std::size_t r = 0; r < spec.reps; ++r) {
        if (!outcomes[r].failure.empty()) {
            s.degenerate.push_back({r, outcomes[r].failure});
            continue;
        }
        for (std::size_t j = 0; j < tests.size(); ++j) per_test[j].push_back(outcomes[r].p[j]);
    }
    for (std::size_t j = 0; j < tests.size(); ++j) {
        TestSummary t;
        t.test = tests[j];
        const auto& p = per_test[j];
        t.valid = p.size();
        t.rejections = static_cast<std::size_t>(std::count_if(p.begin(), p.end(), [&](double v) { return v < level; }));
        if (t.valid > 0) {
            t.rate = static_cast<double>(t.rejections) / t.valid;
            t.mc_se = std::sqrt(t.rate * (1.0 - t.rate) / t.valid);
            t.ks_distance = ks_distance_uniform(p);
            for (double g : s.ecdf_grid) {
                t.ecdf.push_back(static_cast<double>(std::count_if(p.begin(), p.end(), [&](double v) { return v <= g; })) /
                                 t.valid);
            }
        }
        s.tests.push_back(std::move(t));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Scenario catalog. One scenario per line, '#' starts a comment:
//
//   reference b0=0 bx=0.25 ba=-0.5 bxa=0.25
//   set2 s1 alpha=-0.25 gamma=0.75
//   set3 s12 a0=0 g0=0 a1=-0.5 g1=0
//
// The reference line fixes the prediction model shared by sets 2 and 3.

struct CatalogEntry {
    int set_id = 2;
    std::string id;
    LogitShift shift;
    PowerTransform transform;
};

struct Catalog {
    ReferenceModel reference;
    std::vector<CatalogEntry> entries;

    const CatalogEntry& find(int set_id, const std::string& id) const {
        for (const auto& e : entries) {
            if (e.set_id == set_id && e.id == id) return e;
        }
        throw Error(ErrorCode::UnknownScenario, "simulation",
                    "no scenario '" + id + "' in set " + std::to_string(set_id));
    }

    // ScenarioSpec for a catalog scenario with the shared reference model applied.
    ScenarioSpec scenario(int set_id, const std::string& id) const {
        const CatalogEntry& e = find(set_id, id);
        ScenarioSpec s;
        s.set_id = set_id;
        s.id = id;
        s.beta = reference;
        s.shift = e.shift;
        s.transform = e.transform;
        return s;
    }
};

namespace detail {

inline double parse_number(const std::string& text, const std::string& context) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument, "simulation", "bad number '" + text + "' in " + context);
    }
    return v;
}

// "k1=v1,k2=v2" or whitespace separated "k1=v1 k2=v2".
inline std::map<std::string, double> parse_assignments(const std::string& text, const std::string& context) {
    std::map<std::string, double> out;
    std::string token;
    std::string normalized = text;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::istringstream in(normalized);
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error(ErrorCode::InvalidArgument, "simulation", "expected key=value, got '" + token + "' in " + context);
        }
        const std::string key = token.substr(0, eq);
        if (out.contains(key)) throw Error(ErrorCode::InvalidArgument, "simulation", "duplicate key '" + key + "' in " + context);
        out[key] = parse_number(token.substr(eq + 1), context);
    }
    return out;
}

inline double take(std::map<std::string, double>& kv, const std::string& key, const std::string& context) {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::InvalidArgument, "simulation", "missing '" + key + "' in " + context);
    const double v = it->second;
    kv.erase(it);
    return v;
}

inline void require_consumed(const std::map<std::string, double>& kv, const std::string& context) {
    if (!kv.empty()) {
        throw Error(ErrorCode::InvalidArgument, "simulation", "unexpected key '" + kv.begin()->first + "' in " + context);
    }
}

}  // namespace detail

// Reference-model cell, e.g. "b0=-1,bx=0.25,ba=-1,bxa=0.25".
inline ReferenceModel parse_cell(const std::string& text) {
    auto kv = detail::parse_assignments(text, "cell");
    ReferenceModel m;
    m.b0 = detail::take(kv, "b0", "cell");
    m.bx = detail::take(kv, "bx", "cell");
    m.ba = detail::take(kv, "ba", "cell");
    m.bxa = detail::take(kv, "bxa", "cell");
    detail::require_consumed(kv, "cell");
    return m;
}

inline Catalog parse_catalog(const std::string& text) {
    Catalog cat;
    bool have_reference = false;
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream in(line);
        std::string head;
        if (!(in >> head)) continue;
        const std::string context = "catalog line " + std::to_string(line_no);
        if (head == "reference") {
            std::string rest;
            std::getline(in, rest);
            cat.reference = parse_cell(rest);
            have_reference = true;
            continue;
        }
        CatalogEntry e;
        if (head == "set2") e.set_id = 2;
        else if (head == "set3") e.set_id = 3;
        else throw Error(ErrorCode::InvalidArgument, "simulation", "unknown record '" + head + "' in " + context);
        if (!(in >> e.id)) throw Error(ErrorCode::InvalidArgument, "simulation", "missing scenario id in " + context);
        std::string rest;
        std::getline(in, rest);
        auto kv = detail::parse_assignments(rest, context);
        if (e.set_id == 2) {
            e.shift.alpha = detail::take(kv, "alpha", context);
            e.shift.gamma = detail::take(kv, "gamma", context);
        } else {
            e.transform.alpha0 = detail::take(kv, "a0", context);
            e.transform.gamma0 = detail::take(kv, "g0", context);
            e.transform.alpha1 = detail::take(kv, "a1", context);
            e.transform.gamma1 = detail::take(kv, "g1", context);
        }
        detail::require_consumed(kv, context);
        for (const auto& other : cat.entries) {
            if (other.set_id == e.set_id && other.id == e.id) {
                throw Error(ErrorCode::InvalidArgument, "simulation", "duplicate scenario " + e.id + " in " + context);
            }
        }
        cat.entries.push_back(std::move(e));
    }
    if (!have_reference) throw Error(ErrorCode::InvalidArgument, "simulation", "catalog has no reference line");
    return cat;
}

}  // namespace itecal::sim
