// sa3d - estimate, simulate and explore fused 3D systolic array designs.
//
//   sa3d estimate design.json
//   sa3d simulate design.json --fidelity blocked --seed 7
//   sa3d dse --budget 4713 --range d0_i=28:72 --range d0_j=16:32 --range d0_k=1:8
//   sa3d compare [--refs data/reference_tables.json]
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "sa3d/report.hpp"

using namespace sa3d;

namespace {

ProblemShape parse_problem(const std::string& text) {
    ProblemShape p;
    char x1 = 0, x2 = 0;
    std::istringstream is(text);
    if (!(is >> p.d2_i >> x1 >> p.d2_j >> x2 >> p.d2_k) || x1 != 'x' || x2 != 'x' || !is.eof()) {
        throw Error(ErrorKind::InvalidArgument, "problem must look like 1024x1024x1024, got '" + text + "'");
    }
    return p;
}

ProblemShape config_problem(const DesignConfig& cfg, const std::string& override_text) {
    if (!override_text.empty()) return parse_problem(override_text);
    if (!cfg.problem) throw Error(ErrorKind::InvalidArgument, "no problem in config; pass --problem");
    return *cfg.problem;
}

DesignPoint feasible_point(const DesignConfig& cfg) {
    DesignPoint p = make_design_point(cfg);
    if (!p.feasible) {
        std::string msg = "design " + to_string(p.shape) + " is infeasible:";
        for (const auto& v : p.violations) msg += "\n  " + v;
        throw Error(ErrorKind::InvalidPlan, msg);
    }
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Performance model and simulator for fused 3D systolic array matrix multiplication"};
    app.require_subcommand(1);

    std::string format_text = "table";
    app.add_option("--format", format_text, "Output format")
        ->check(CLI::IsMember({"table", "csv"}))
        ->capture_default_str();

    // estimate
    auto* est = app.add_subcommand("estimate", "Closed-form performance estimate of one design");
    std::string est_config, est_problem;
    est->add_option("config", est_config, "Design configuration (JSON)")->required();
    est->add_option("--problem", est_problem, "Problem size d2_i x d2_j x d2_k, e.g. 2048x2048x2048");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run the simulator on random operands");
    std::string sim_config, sim_problem, fidelity_text = "blocked", fill_text = "int";
    std::uint64_t seed = 1;
    sim->add_option("config", sim_config, "Design configuration (JSON)")->required();
    sim->add_option("--problem", sim_problem, "Problem size d2_i x d2_j x d2_k");
    sim->add_option("--fidelity", fidelity_text, "functional | blocked | counts")
        ->check(CLI::IsMember({"functional", "blocked", "counts"}))
        ->capture_default_str();
    sim->add_option("--seed", seed, "Operand seed")->capture_default_str();
    sim->add_option("--fill", fill_text, "Operand values: int (exact) or float")
        ->check(CLI::IsMember({"int", "float"}))
        ->capture_default_str();

    // dse
    auto* dse = app.add_subcommand("dse", "Enumerate grid shapes under a DSP budget");
    Count budget = 0;
    std::vector<std::string> ranges;
    std::string dse_problem = "4096x4096x4096";
    double fmax = ClockSpec{}.fmax_mhz;
    double mem_eff = 1.0;
    unsigned jobs = 1;
    std::optional<Count> max_dp;
    dse->add_option("--budget", budget, "Available DSP blocks")->required()->check(CLI::PositiveNumber);
    dse->add_option("--range", ranges, "name=lo:hi[:step] for d0_i, d0_j, d0_k, d_p (repeatable)");
    dse->add_option("--problem", dse_problem, "Problem size used for the estimates")->capture_default_str();
    dse->add_option("--fmax", fmax, "Assumed clock in MHz for every point")->capture_default_str();
    dse->add_option("--mem-efficiency", mem_eff, "Memory controller efficiency")->capture_default_str();
    dse->add_option("--jobs", jobs, "Parallel evaluation threads")->capture_default_str();
    dse->add_option("--max-dp", max_dp, "Mark points with a larger dot unit as infeasible");

    // compare
    auto* cmp = app.add_subcommand("compare", "Compare the model with the bundled measurements");
    std::string refs_path = SA3D_DEFAULT_REFS;
    ComparePolicy policy;
    bool with_sim = false;
    cmp->add_option("--refs", refs_path, "Reference data file")->capture_default_str();
    cmp->add_option("--tol", policy.tol, "Tolerance once d2/d1 reaches --large-ratio")->capture_default_str();
    cmp->add_option("--tol-small", policy.tol_small, "Tolerance for smaller problems")->capture_default_str();
    cmp->add_option("--large-ratio", policy.large_ratio, "d2/d1 at which --tol applies")->capture_default_str();
    cmp->add_option("--peak-tol", policy.peak_tol_gflops, "Peak throughput tolerance in GFLOPS")
        ->capture_default_str();
    cmp->add_flag("--with-sim", with_sim, "Also run the count-only schedule per row");

    CLI11_PARSE(app, argc, argv);

    try {
        const Format format = parse_format(format_text);

        if (*est) {
            const DesignConfig cfg = load_config(est_config);
            const DesignPoint p = feasible_point(cfg);
            const ProblemShape problem = config_problem(cfg, est_problem);
            std::cout << estimate_report(p, problem, predict(p, problem), format);
            return 0;
        }

        if (*sim) {
            const DesignConfig cfg = load_config(sim_config);
            const DesignPoint p = feasible_point(cfg);
            const ProblemShape problem = config_problem(cfg, sim_problem);
            const auto outcome = simulate(p, problem, parse_fidelity(fidelity_text), seed,
                                          fill_text == "int" ? Fill::SmallInt : Fill::Uniform);
            std::cout << simulation_report(p, problem, outcome, seed, format);
            const bool ok = outcome.audit.empty() && (!outcome.checked || outcome.max_rel_error <= 1e-5);
            return ok ? 0 : 1;
        }

        if (*dse) {
            EnumerationSpec spec;
            spec.budget = budget;
            spec.clock.fmax_mhz = fmax;
            spec.mem.efficiency = mem_eff;
            spec.max_dp = max_dp;
            validate(spec.mem);
            std::map<std::string, Range*> slots = {
                {"d0_i", &spec.d0_i}, {"d0_j", &spec.d0_j}, {"d0_k", &spec.d0_k}, {"d_p", &spec.d_p}};
            bool dp_given = false;
            for (const auto& r : ranges) {
                const auto eq = r.find('=');
                const auto name = r.substr(0, eq);
                if (eq == std::string::npos || !slots.count(name)) {
                    throw Error(ErrorKind::InvalidArgument, "bad --range '" + r + "'");
                }
                *slots[name] = parse_range(r.substr(eq + 1));
                dp_given = dp_given || name == "d_p";
            }
            if (!dp_given) spec.d_p = Range{1, spec.d0_k.hi, 1};
            const auto points = enumerate(spec);
            const auto problem = parse_problem(dse_problem);
            std::cout << dse_report(points, predict_all(points, problem, jobs), problem, format);
            return 0;
        }

        if (*cmp) {
            policy.simulate = with_sim;
            const ReferenceSet refs = load_references(refs_path);
            const auto report = compare(predictions_for(refs, policy), refs, policy);
            std::cout << compare_report(report, refs, format);
            return report.all_pass() ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
