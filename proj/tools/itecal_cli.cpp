// itecal: assess moderate calibration of ITE models from trial data, render
// cumulative calibration plots, and run the Monte Carlo scenarios.

#include "itecal/itecal.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#ifndef ITECAL_DEFAULT_CATALOG
#define ITECAL_DEFAULT_CATALOG "data/scenarios.txt"
#endif

namespace {

using namespace itecal;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDegenerate = 3;

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::DegenerateVariance: return kExitDegenerate;
        case ErrorCode::Io: return kExitIo;
        default: return kExitValidation;
    }
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cli_io", "cannot write '" + path + "'");
    f << body;
    if (!f) throw Error(ErrorCode::Io, "cli_io", "write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cli_io", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

unsigned worker_count(int flag) {
    if (flag > 0) return static_cast<unsigned>(flag);
    if (const char* env = std::getenv("ITECAL_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct DataFlags {
    std::string input;
    std::string approach = "auto";
    std::string test = "bridge";
    std::string order_by;
    double alpha = 0.05;
    std::string json;
    std::string plot;
    std::string title;
};

io::AssessOptions resolve_options(const DataFlags& f, const io::Dataset& ds) {
    io::AssessOptions o;
    o.alpha = f.alpha;
    o.order_by = f.order_by;
    o.test = *io::parse_test_choice(f.test);
    if (f.approach == "auto") {
        const bool has_pi = std::all_of(ds.records.begin(), ds.records.end(), [](const auto& r) { return r.pi.has_value(); });
        o.approach = has_pi ? io::Approach::Both : io::Approach::Marginal;
    } else {
        o.approach = *io::parse_approach(f.approach);
    }
    return o;
}

io::PlotSpec plot_spec(const io::Assessment& a, const DataFlags& f) {
    io::PlotSpec spec;
    spec.alpha = f.alpha;
    spec.title = f.title;
    spec.key_label = a.options.order_by.empty() ? "predicted ITE" : a.options.order_by;
    if (a.per_arm) spec.key_label = "predicted risk";
    for (const auto& r : a.results) spec.layers.push_back({r.path, r.approach});
    // Per-arm layers have different keys and scales; guides follow the first.
    return spec;
}

void print_summary(const io::Assessment& a) {
    for (const auto& w : a.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& r : a.results) {
        std::printf("%-12s C_n=% .4f  S_n=% .4f", r.approach.c_str(), r.report.c_n, r.report.s_n);
        if (r.report.p_mean) std::printf("  p_mean=%.4f", *r.report.p_mean);
        if (r.report.bridge_stat) std::printf("  S*=%.4f  p_bridge=%.4f", *r.report.bridge_stat, *r.report.p_bridge);
        if (r.report.p_unified) std::printf("  p_unified=%.4f", *r.report.p_unified);
        std::printf("  BM=%.4f  p_bm=%.4f\n", r.report.bm_stat, r.report.p_bm);
    }
    if (a.per_arm) std::printf("compound per-arm p=%.4f\n", a.per_arm->p_compound);
}

int run_data_command(const DataFlags& f, bool require_plot) {
    io::DatasetOptions dopt;
    dopt.order_column = f.order_by;
    const io::Dataset ds = io::parse_dataset(f.input, dopt);
    const io::Assessment a = io::assess(ds.records, resolve_options(f, ds));
    if (!require_plot) print_summary(a);
    if (!f.json.empty()) write_file(f.json, io::to_json(a).dump(2) + "\n");
    if (!f.plot.empty()) write_file(f.plot, io::render_plot(plot_spec(a, f)));
    return kExitOk;
}

struct SimFlags {
    int set = 0;
    std::string cell;
    std::string scenario;
    std::string transform;
    std::optional<double> shift_alpha;
    std::optional<double> shift_gamma;
    std::size_t n = 500;
    std::size_t reps = 2000;
    std::uint64_t seed = 1;
    double level = 0.05;
    std::string catalog = ITECAL_DEFAULT_CATALOG;
    std::vector<std::string> tests;
    int workers = 0;
    std::string json;
    std::string table;
};

sim::ScenarioSpec resolve_scenario(const SimFlags& f) {
    auto invalid = [](const std::string& msg) { return Error(ErrorCode::InvalidArgument, "simulation", msg); };
    sim::ScenarioSpec spec;
    if (!f.scenario.empty()) {
        if (f.set == 1) throw invalid("set 1 has no catalog; use --cell");
        spec = sim::parse_catalog(read_file(f.catalog)).scenario(f.set, f.scenario);
    } else {
        spec.set_id = f.set;
        if (f.set != 1) spec.beta = sim::parse_catalog(read_file(f.catalog)).reference;
    }
    if (!f.cell.empty()) spec.beta = sim::parse_cell(f.cell);
    if (f.set == 1 && f.cell.empty()) throw invalid("set 1 needs --cell b0=..,bx=..,ba=..,bxa=..");
    if (f.set == 2 && f.scenario.empty()) {
        if (!f.shift_alpha || !f.shift_gamma) throw invalid("set 2 needs --scenario or both --alpha and --gamma");
        spec.shift = {*f.shift_alpha, *f.shift_gamma};
    }
    if (f.set == 3 && f.scenario.empty()) {
        if (f.transform.empty()) throw invalid("set 3 needs --scenario or --transform a0=..,g0=..,a1=..,g1=..");
        auto kv = sim::detail::parse_assignments(f.transform, "--transform");
        spec.transform.alpha0 = sim::detail::take(kv, "a0", "--transform");
        spec.transform.gamma0 = sim::detail::take(kv, "g0", "--transform");
        spec.transform.alpha1 = sim::detail::take(kv, "a1", "--transform");
        spec.transform.gamma1 = sim::detail::take(kv, "g1", "--transform");
        sim::detail::require_consumed(kv, "--transform");
    }
    if (f.set != 2 && (f.shift_alpha || f.shift_gamma)) throw invalid("--alpha/--gamma apply to set 2 only");
    spec.n = f.n;
    spec.reps = f.reps;
    spec.seed = f.seed;
    spec.validate();
    return spec;
}

int run_simulate(const SimFlags& f) {
    const sim::ScenarioSpec spec = resolve_scenario(f);
    std::vector<sim::TestId> tests;
    for (const auto& name : f.tests) {
        bool found = false;
        for (auto t : sim::kAllTests) {
            if (name == sim::to_string(t)) { tests.push_back(t); found = true; }
        }
        if (!found) throw Error(ErrorCode::InvalidArgument, "simulation", "unknown test '" + name + "'");
    }
    if (tests.empty()) tests.assign(sim::kAllTests.begin(), sim::kAllTests.end());
    const sim::McSummary summary = sim::run_monte_carlo(spec, tests, worker_count(f.workers), f.level);
    const std::string table = io::to_table(summary);
    std::cout << table;
    if (!f.table.empty()) write_file(f.table, table);
    if (!f.json.empty()) write_file(f.json, io::to_json(summary).dump(2) + "\n");
    return kExitOk;
}

void add_data_flags(CLI::App* cmd, DataFlags& f, bool plot_required) {
    cmd->add_option("--input", f.input, "CSV with arm, outcome, delta[, pi][, order_key][, id]")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--approach", f.approach, "conditional | marginal | both | per-arm | auto")
        ->check(CLI::IsMember({"auto", "conditional", "marginal", "both", "per-arm"}));
    cmd->add_option("--order-by", f.order_by, "order subjects by this numeric column instead of delta");
    cmd->add_option("--alpha", f.alpha, "significance level for decisions and plot guides")->check(CLI::Range(1e-12, 1.0 - 1e-12));
    auto* plot = cmd->add_option("--plot", f.plot, "write the cumulative calibration plot (SVG)");
    if (plot_required) plot->required();
    cmd->add_option("--title", f.title, "plot title");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"itecal: moderate calibration of individualized treatment effect models"};
    app.require_subcommand(1);

    DataFlags assess_flags;
    auto* assess = app.add_subcommand("assess", "test calibration of predictions in a trial dataset");
    add_data_flags(assess, assess_flags, false);
    assess->add_option("--test", assess_flags.test, "bm | bridge | bridge-only | both")
        ->check(CLI::IsMember({"bm", "bridge", "bridge-only", "both"}));
    assess->add_option("--json", assess_flags.json, "write the JSON report here");

    DataFlags plot_flags;
    auto* plot = app.add_subcommand("plot", "render the cumulative calibration plot only");
    add_data_flags(plot, plot_flags, true);

    SimFlags sim_flags;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo rejection rates for a scenario");
    simulate->add_option("--set", sim_flags.set, "simulation set (1, 2 or 3)")->required()->check(CLI::Range(1, 3));
    simulate->add_option("--cell", sim_flags.cell, "reference model b0=..,bx=..,ba=..,bxa=..");
    simulate->add_option("--scenario", sim_flags.scenario, "scenario id from the catalog (sets 2 and 3)");
    simulate->add_option("--alpha", sim_flags.shift_alpha, "set 2 location shift of treated logits");
    simulate->add_option("--gamma", sim_flags.shift_gamma, "set 2 scale of the treated effect on the logit");
    simulate->add_option("--transform", sim_flags.transform, "set 3 parameters a0=..,g0=..,a1=..,g1=..");
    simulate->add_option("--n", sim_flags.n, "subjects per replicate");
    simulate->add_option("--reps", sim_flags.reps, "replicates");
    simulate->add_option("--seed", sim_flags.seed, "base seed of the counter-based generator");
    simulate->add_option("--level", sim_flags.level, "significance level for rejection rates")->check(CLI::Range(1e-12, 1.0 - 1e-12));
    simulate->add_option("--catalog", sim_flags.catalog, "scenario catalog file");
    simulate->add_option("--tests", sim_flags.tests, "subset of conditional-bm, conditional-bridge, marginal-bm, marginal-bridge");
    simulate->add_option("--workers", sim_flags.workers, "worker threads (default: $ITECAL_WORKERS or all cores)");
    simulate->add_option("--json", sim_flags.json, "write the JSON summary here");
    simulate->add_option("--table", sim_flags.table, "write the text table here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*assess) return run_data_command(assess_flags, false);
        if (*plot) return run_data_command(plot_flags, true);
        if (*simulate) return run_simulate(sim_flags);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
