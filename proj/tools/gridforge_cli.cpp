// gridforge command-line front end.
//
// Exit codes: 0 ok, 1 parse or validation error, 2 infeasible design,
// 3 singular loop, 4 numerical abort during simulation, 5 verify failure.
// stdout carries the paths of written artifacts; diagnostics go to stderr.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gridforge/acceptance.hpp"
#include "gridforge/errors.hpp"
#include "gridforge/frequency.hpp"
#include "gridforge/metrics.hpp"
#include "gridforge/report.hpp"
#include "gridforge/scenario.hpp"
#include "gridforge/simulator.hpp"

namespace fs = std::filesystem;
using namespace gridforge;

namespace {

enum Exit : int { kOk = 0, kParse = 1, kInfeasible = 2, kSingular = 3, kAbort = 4, kVerifyFail = 5 };

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_artifact(const fs::path& dir, const std::string& file, const std::string& text) {
    const fs::path p = dir / file;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("--out", "cannot write " + p.string());
    out << text;
    return p.string();
}

fs::path prepare_out(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ValidationError("--out", "cannot create " + dir + ": " + ec.message());
    return p;
}

struct Common {
    std::string out = "gridforge_out";
    std::vector<std::string> sets;
};

int cmd_design(const std::string& spec_path, const Common& c) {
    const DesignDocument doc = parse_design_spec(read_file(spec_path), c.sets);
    const ControllerSet cs = synthesize(doc.spec);
    const fs::path dir = prepare_out(c.out);
    std::cout << write_artifact(dir, doc.name + "_design.txt", design_report(doc.name, doc.spec, cs)) << "\n";
    std::cout << write_artifact(dir, doc.name + "_controller.json", controller_to_json(cs)) << "\n";
    return kOk;
}

struct AnalyzeArgs {
    std::string controller;
    double line_r = 0.0, line_x = 0.0, v2 = 170.0, f0 = 60.0;
    double notch_ratio = 0.0;
    double w_min = 1e-1, w_max = 1e5;
    int ppd = 50;
};

int cmd_analyze(const AnalyzeArgs& a, const Common& c) {
    const std::string text = apply_overrides(read_file(a.controller), c.sets);
    ControllerSet cs = controller_from_json(text);
    const double w0 = 2.0 * std::numbers::pi * a.f0;
    const LineModel line = LineModel::from_rx(a.line_r, a.line_x, w0);
    if (a.notch_ratio > 0.0) {
        const Resonance r = resonance_params(cs, LinePhasor::from_rx(a.line_r, a.line_x, a.v2, w0));
        cs = with_notch(cs, r.w_i, r.xi_i, a.notch_ratio * r.xi_i);
    }
    const AnalysisOutput res = analyze_controller(cs, line, a.v2, log_grid(a.w_min, a.w_max, a.ppd));
    const fs::path dir = prepare_out(c.out);
    std::cout << write_artifact(dir, "sigma.csv", res.sigma_csv) << "\n";
    std::cout << write_artifact(dir, "disturbance.csv", res.disturbance_csv) << "\n";
    for (const auto& [name, csv] : res.bode_csvs) std::cout << write_artifact(dir, "bode_" + name + ".csv", csv) << "\n";
    std::cout << write_artifact(dir, "analysis.txt", res.summary) << "\n";
    return kOk;
}

struct SimulateArgs {
    std::vector<std::string> inputs;
    int decimate = 0;
    long seed = 0;
    bool seed_given = false;
    unsigned threads = 0;
};

std::string resolve_scenario(const std::string& in) {
    if (fs::exists(in)) return in;
    const std::string bundled = bundled_scenario_path(in);
    if (fs::exists(bundled)) return bundled;
    throw ValidationError("", "no scenario file or bundled scenario named '" + in + "'");
}

int cmd_simulate(const SimulateArgs& a, const Common& c) {
    std::vector<std::string> sets = c.sets;
    if (a.decimate > 0) sets.push_back("sim.decimate=" + std::to_string(a.decimate));
    std::vector<Scenario> scenarios;
    for (const std::string& in : a.inputs) scenarios.push_back(load_scenario_file(resolve_scenario(in), sets));
    const fs::path dir = prepare_out(c.out);

    std::vector<RunOutcome> res = run_batch_isolated(scenarios, a.threads);
    int rc = kOk;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const Scenario& sc = scenarios[i];
        RunOutcome& r = res[i];
        if (r.error) {
            try {
                std::rethrow_exception(r.error);
            } catch (const NonFinite& e) {
                std::cerr << "gridforge: " << sc.name << ": " << e.what() << "\n";
                const fs::path p = dir / (sc.name + "_abort.csv");
                r.dump.write_csv_file(p.string());
                std::cerr << "gridforge: recent history written to " << p.string() << "\n";
                std::cout << p.string() << "\n";
                rc = kAbort;
            }
            continue;
        }
        if (a.seed_given) r.series.metadata.emplace_back("seed", std::to_string(a.seed));
        const fs::path csv = dir / (sc.name + ".csv");
        r.series.write_csv_file(csv.string());
        std::cout << csv.string() << "\n";
        try {
            const MetricsReport m = compute_metrics(r.series, sc);
            std::cout << write_artifact(dir, sc.name + "_metrics.txt", m.to_text()) << "\n";
            std::cout << write_artifact(dir, sc.name + "_metrics.csv", m.csv_header() + "\n" + m.csv_row() + "\n")
                      << "\n";
        } catch (const InsufficientWindow& e) {
            std::cerr << "gridforge: " << sc.name << ": metrics skipped: " << e.what() << "\n";
        }
    }
    return rc;
}

struct VerifyArgs {
    std::string only;
    double droop_gain_scale = 1.0;
};

int cmd_verify(const VerifyArgs& a, const Common& c) {
    AcceptanceOptions opt;
    opt.droop_gain_scale = a.droop_gain_scale;
    if (!a.only.empty()) {
        std::stringstream ss(a.only);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                opt.only.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw ValidationError("--only", "not a criterion number: '" + tok + "'");
            }
        }
    }
    std::string text;
    bool all = true;
    for (int id : opt.only)
        if (id < 1 || id > kCriteriaCount)
            throw ValidationError("--only", "criteria are numbered 1.." + std::to_string(kCriteriaCount));
    for (const CriterionResult& r : run_acceptance(opt)) {
        const std::string line = format_result(r);
        std::cerr << line << "\n";
        text += line + "\n";
        all = all && r.passed;
    }
    const fs::path dir = prepare_out(c.out);
    std::cout << write_artifact(dir, "verify.txt", text) << "\n";
    return all ? kOk : kVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridforge: controller synthesis and simulation for hybrid-source inverters"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", common.out, "Output directory")->capture_default_str();
        sub->add_option("--set", common.sets, "Override key=value (dotted path), repeatable");
    };

    std::string spec_path;
    CLI::App* design = app.add_subcommand("design", "Synthesize a controller set from a design spec");
    design->add_option("spec", spec_path, "Design spec (JSON)")->required();
    add_common(design);

    AnalyzeArgs an;
    CLI::App* analyze = app.add_subcommand("analyze", "Frequency-domain analysis of a controller on a line");
    analyze->add_option("controller", an.controller, "Controller file written by `design`")->required();
    analyze->add_option("--line-r", an.line_r, "Line resistance, ohm")->required();
    analyze->add_option("--line-x", an.line_x, "Line reactance at the nominal frequency, ohm")->required();
    analyze->add_option("--v2", an.v2, "PCC voltage amplitude, V")->capture_default_str();
    analyze->add_option("--f0", an.f0, "Nominal frequency, Hz")->capture_default_str();
    analyze->add_option("--notch-ratio", an.notch_ratio, "Install the resonance notch with xi_0 = ratio * xi_i");
    analyze->add_option("--w-min", an.w_min, "Sweep start, rad/s")->capture_default_str();
    analyze->add_option("--w-max", an.w_max, "Sweep end, rad/s")->capture_default_str();
    analyze->add_option("--points-per-decade", an.ppd, "Sweep density")->capture_default_str();
    add_common(analyze);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Run scenarios and write time series and metrics");
    simulate->add_option("scenarios", sim.inputs, "Scenario files or bundled scenario names")->required();
    simulate->add_option("--decimate", sim.decimate, "Record every N control periods");
    CLI::Option* seed_opt = simulate->add_option("--seed", sim.seed, "Recorded in the output metadata only");
    simulate->add_option("--threads", sim.threads, "Batch workers (default: GRIDFORGE_THREADS or all cores)");
    add_common(simulate);

    VerifyArgs ver;
    CLI::App* verify = app.add_subcommand("verify", "Run the acceptance suite");
    verify->add_option("--only", ver.only, "Comma-separated criterion numbers");
    verify->add_option("--droop-gain-scale", ver.droop_gain_scale)->group("");
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kParse;
    }
    sim.seed_given = seed_opt->count() > 0;

    try {
        if (design->parsed()) return cmd_design(spec_path, common);
        if (analyze->parsed()) return cmd_analyze(an, common);
        if (simulate->parsed()) return cmd_simulate(sim, common);
        if (verify->parsed()) return cmd_verify(ver, common);
    } catch (const Infeasible& e) {
        std::cerr << "gridforge: infeasible design: " << e.what() << "\n";
        return kInfeasible;
    } catch (const SingularLoop& e) {
        std::cerr << "gridforge: singular loop: " << e.what() << "\n";
        return kSingular;
    } catch (const NonFinite& e) {
        std::cerr << "gridforge: numerical abort: " << e.what() << "\n";
        return kAbort;
    } catch (const std::exception& e) {
        std::cerr << "gridforge: " << e.what() << "\n";
        return kParse;
    }
    return kParse;
}
