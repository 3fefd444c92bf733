#include "sa3d/dse.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sa3d/systolic_engine.hpp"

namespace sa3d {

// ---------------------------------------------------------------------------
// Design points
// ---------------------------------------------------------------------------

DesignPoint make_design_point(const DesignConfig& cfg) {
    DesignPoint p;
    p.shape = cfg.shape;
    p.clock = cfg.clock;
    p.mem = cfg.mem;
    p.lat = cfg.lat;
    p.constraints = cfg.constraints;
    validate(p.shape);

    try {
        p.plan = make_blocking_plan(p.shape, p.clock, p.mem, cfg.d1_override);
    } catch (const Error& e) {
        p.violations.push_back(e.what());
        if (cfg.d1_override) {
            // Keep the requested block sizes so the point still round-trips.
            p.plan.overridden = true;
            p.plan.d1_i = cfg.d1_override->first;
            p.plan.d1_j = cfg.d1_override->second;
        }
    }
    if (p.constraints.dsp_budget && dsp_count(p.shape) > *p.constraints.dsp_budget) {
        p.violations.push_back("dsp_count " + std::to_string(dsp_count(p.shape)) +
                               " exceeds budget " + std::to_string(*p.constraints.dsp_budget));
    }
    if (p.constraints.max_dp && p.shape.d_p > *p.constraints.max_dp) {
        p.violations.push_back("dot unit size " + std::to_string(p.shape.d_p) +
                               " exceeds the configured limit " +
                               std::to_string(*p.constraints.max_dp));
    }
    p.feasible = p.violations.empty();
    return p;
}

DesignConfig to_config(const DesignPoint& point, std::optional<ProblemShape> problem) {
    DesignConfig cfg;
    cfg.shape = point.shape;
    cfg.clock = point.clock;
    cfg.mem = point.mem;
    cfg.lat = point.lat;
    cfg.constraints = point.constraints;
    if (point.plan.overridden) cfg.d1_override = std::make_pair(point.plan.d1_i, point.plan.d1_j);
    cfg.problem = problem;
    return cfg;
}

Range parse_range(const std::string& text) {
    std::vector<Count> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stoll(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidArgument, "bad range '" + text + "'");
        }
    }
    if (parts.empty() || parts.size() > 3) {
        throw Error(ErrorKind::InvalidArgument, "bad range '" + text + "', expected lo:hi[:step]");
    }
    Range r;
    r.lo = parts[0];
    r.hi = parts.size() > 1 ? parts[1] : parts[0];
    r.step = parts.size() > 2 ? parts[2] : 1;
    return r;
}

namespace {

void check_range(const Range& r, const char* name) {
    if (r.step < 1 || r.lo < 1 || r.lo > r.hi) {
        throw Error(ErrorKind::InvalidArgument,
                    std::string("empty or invalid range for ") + name + ": " + std::to_string(r.lo) +
                        ":" + std::to_string(r.hi) + ":" + std::to_string(r.step));
    }
}

}  // namespace

std::vector<DesignPoint> enumerate(const EnumerationSpec& spec) {
    if (spec.budget < 1) throw Error(ErrorKind::InvalidArgument, "DSP budget must be >= 1");
    check_range(spec.d0_i, "d0_i");
    check_range(spec.d0_j, "d0_j");
    check_range(spec.d0_k, "d0_k");
    check_range(spec.d_p, "d_p");

    std::vector<DesignPoint> out;
    for (Count i = spec.d0_i.lo; i <= spec.d0_i.hi; i += spec.d0_i.step) {
        for (Count j = spec.d0_j.lo; j <= spec.d0_j.hi; j += spec.d0_j.step) {
            for (Count k = spec.d0_k.lo; k <= spec.d0_k.hi; k += spec.d0_k.step) {
                if (i * j * k > spec.budget) continue;
                for (Count dp = spec.d_p.lo; dp <= spec.d_p.hi; dp += spec.d_p.step) {
                    if (k % dp != 0) continue;
                    DesignConfig cfg;
                    cfg.shape = {i, j, k, dp};
                    cfg.clock = spec.clock;
                    cfg.mem = spec.mem;
                    cfg.lat = spec.lat;
                    cfg.constraints.dsp_budget = spec.budget;
                    cfg.constraints.max_dp = spec.max_dp;
                    out.push_back(make_design_point(cfg));
                }
            }
        }
    }
    return out;
}

PerfEstimate predict(const DesignPoint& point, const ProblemShape& problem) {
    if (!point.feasible) {
        throw Error(ErrorKind::InvalidPlan, "cannot predict an infeasible design point " +
                                                to_string(point.shape));
    }
    if (problem.d2_i < 1 || problem.d2_j < 1 || problem.d2_k < 1) {
        throw Error(ErrorKind::InvalidProblem, "problem dimensions must be >= 1");
    }
    return estimate(point.shape, point.plan, problem, point.clock, point.mem, point.lat);
}

std::vector<std::optional<PerfEstimate>> predict_all(const std::vector<DesignPoint>& points,
                                                     const ProblemShape& problem, unsigned jobs) {
    std::vector<std::optional<PerfEstimate>> out(points.size());
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t n = next++; n < points.size(); n = next++) {
            if (points[n].feasible) out[n] = predict(points[n], problem);
        }
    };
    if (jobs <= 1) {
        worker();
        return out;
    }
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    return out;
}

Fidelity parse_fidelity(const std::string& text) {
    if (text == "functional") return Fidelity::Functional;
    if (text == "blocked") return Fidelity::Blocked;
    if (text == "counts") return Fidelity::Counts;
    throw Error(ErrorKind::InvalidArgument, "unknown fidelity '" + text + "'");
}

const char* to_string(Fidelity f) {
    switch (f) {
        case Fidelity::Functional: return "functional";
        case Fidelity::Blocked: return "blocked";
        case Fidelity::Counts: return "counts";
    }
    return "?";
}

SimulationOutcome simulate(const DesignPoint& point, const ProblemShape& problem, Fidelity fidelity,
                           std::uint64_t seed, Fill fill) {
    if (!point.feasible) {
        throw Error(ErrorKind::InvalidPlan, "cannot simulate an infeasible design point");
    }
    SimulationOutcome out;
    out.fidelity = fidelity;
    const BlockedConfig cfg{point.shape, point.plan, problem, point.mem, point.clock, point.lat};

    if (fidelity == Fidelity::Counts) {
        out.stats = run_blocked_counts(cfg);
        out.audit = traffic_audit(out.stats, problem, point.plan);
        return out;
    }

    const Matrix a = random_matrix(problem.d2_i, problem.d2_k, seed, fill, Layout::ColMajor);
    const Matrix b = random_matrix(problem.d2_k, problem.d2_j, seed + 1, fill, Layout::RowMajor);
    Matrix c;

    if (fidelity == Fidelity::Blocked) {
        auto res = run_blocked(a, b, cfg);
        c = std::move(res.c);
        out.stats = res.stats;
        out.audit = traffic_audit(out.stats, problem, point.plan);
    } else {
        const auto& s = point.shape;
        if (problem.d2_i % s.d0_i || problem.d2_j % s.d0_j || problem.d2_k % s.d0_k) {
            throw Error(ErrorKind::InvalidProblem,
                        "functional simulation needs d2 to be a multiple of the grid shape");
        }
        c = Matrix(problem.d2_i, problem.d2_j);
        const auto a_rows = block_view(a, s.d0_i, problem.d2_k);
        const auto b_cols = block_view(b, problem.d2_k, s.d0_j);
        for (Count ti = 0; ti < problem.d2_i / s.d0_i; ++ti) {
            const Matrix a_strip = a_rows.block(ti, 0);
            for (Count tj = 0; tj < problem.d2_j / s.d0_j; ++tj) {
                const Matrix tile = systolic_matmul(a_strip, b_cols.block(0, tj), s);
                for (Count ii = 0; ii < s.d0_i; ++ii)
                    for (Count jj = 0; jj < s.d0_j; ++jj) c(ti * s.d0_i + ii, tj * s.d0_j + jj) = tile(ii, jj);
                out.stats.it_comp += problem.d2_k / s.d0_k;
            }
        }
        out.stats.it_tot = out.stats.it_comp;
        out.stats.measured_c = 1.0;
    }

    const Matrix ref = oracle_matmul(a, b);
    out.result_hash = content_hash(c);
    out.checked = true;
    out.bitwise_match = bitwise_equal(c, ref);
    out.max_rel_error = max_relative_error(c, ref);
    return out;
}

// ---------------------------------------------------------------------------
// Reference data
// ---------------------------------------------------------------------------

const ReferenceRecord* ReferenceSet::find(const std::string& id) const {
    for (const auto& d : designs)
        if (d.id == id) return &d;
    return nullptr;
}

ReferenceSet parse_references(const std::string& text) {
    using nlohmann::json;
    ReferenceSet set;
    try {
        const json doc = json::parse(text);
        set.version = doc.at("version").get<int>();
        set.description = doc.value("description", "");
        for (const auto& d : doc.at("designs")) {
            ReferenceRecord r;
            r.id = d.at("id").get<std::string>();
            const auto& a = d.at("arch");
            r.shape = {a.at("d0_i").get<Count>(), a.at("d0_j").get<Count>(), a.at("d0_k").get<Count>(),
                       a.at("d_p").get<Count>()};
            r.n_dsp = d.at("n_dsp").get<Count>();
            r.n_pe = d.at("n_pe").get<Count>();
            r.fitter_failed = d.value("fitter_failed", false);
            if (d.contains("fmax_mhz")) r.fmax_mhz = d.at("fmax_mhz").get<double>();
            if (d.contains("t_peak_gflops")) r.t_peak_gflops = d.at("t_peak_gflops").get<double>();
            if (d.contains("blocking")) {
                r.d1 = std::make_pair(d.at("blocking").at("d1_i").get<Count>(),
                                      d.at("blocking").at("d1_j").get<Count>());
            }
            r.exclude_efficiency = d.value("exclude_efficiency", false);
            r.note = d.value("note", "");
            if (d.contains("measurements")) {
                for (const auto& m : d.at("measurements")) {
                    ReferenceMeasurement rm;
                    rm.problem = {m.at("d2_i").get<Count>(), m.at("d2_j").get<Count>(),
                                  m.at("d2_k").get<Count>()};
                    rm.t_flops_gflops = m.at("t_flops_gflops").get<double>();
                    rm.e_d = m.at("e_d").get<double>();
                    r.measurements.push_back(rm);
                }
            }
            set.designs.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Io, std::string("reference file: ") + e.what());
    }
    return set;
}

ReferenceSet load_references(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::Io, "cannot open reference file " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_references(ss.str());
}

std::vector<Prediction> predictions_for(const ReferenceSet& refs, const ComparePolicy& policy) {
    std::vector<Prediction> out;
    for (const auto& r : refs.designs) {
        if (r.fitter_failed || !r.fmax_mhz) continue;
        const ClockSpec clock{*r.fmax_mhz};
        const BlockingPlan plan = make_blocking_plan(r.shape, clock, policy.mem, r.d1);
        for (const auto& m : r.measurements) {
            Prediction p;
            p.design_id = r.id;
            p.shape = r.shape;
            p.clock = clock;
            p.plan = plan;
            p.problem = m.problem;
            p.c_percent = c_percent(r.shape, plan, m.problem, clock);
            if (policy.simulate) {
                const auto stats = run_blocked_counts(
                    BlockedConfig{r.shape, plan, m.problem, policy.mem, clock, LatencyProfile()});
                p.simulated_c = stats.measured_c;
            }
            out.push_back(std::move(p));
        }
    }
    return out;
}

const char* to_string(RowStatus s) {
    switch (s) {
        case RowStatus::Pass: return "pass";
        case RowStatus::Fail: return "FAIL";
        case RowStatus::Excluded: return "excluded";
        case RowStatus::NoReference: return "no-reference";
    }
    return "?";
}

bool CompareReport::all_pass() const {
    auto failed = [](const auto& row) { return row.status == RowStatus::Fail; };
    return std::none_of(resources.begin(), resources.end(), failed) &&
           std::none_of(efficiency.begin(), efficiency.end(), failed);
}

CompareReport compare(const std::vector<Prediction>& predictions, const ReferenceSet& refs,
                      const ComparePolicy& policy) {
    CompareReport report;

    for (const auto& r : refs.designs) {
        ResourceRow row;
        row.id = r.id;
        row.n_dsp = dsp_count(r.shape);
        row.ref_n_dsp = r.n_dsp;
        row.n_pe = pe_count(r.shape);
        row.ref_n_pe = r.n_pe;
        row.fmax_mhz = r.fmax_mhz;
        row.ref_t_peak_gflops = r.t_peak_gflops;
        bool ok = row.n_dsp == row.ref_n_dsp && row.n_pe == row.ref_n_pe;
        if (r.fmax_mhz) {
            row.t_peak_gflops = to_gflops(t_peak(row.n_dsp, ClockSpec{*r.fmax_mhz}));
            if (r.t_peak_gflops) {
                ok = ok && std::abs(*row.t_peak_gflops - *r.t_peak_gflops) <= policy.peak_tol_gflops;
            }
        }
        if (r.fitter_failed) row.note = "fitter failed";
        row.status = ok ? RowStatus::Pass : RowStatus::Fail;
        report.resources.push_back(std::move(row));
    }

    for (const auto& p : predictions) {
        EfficiencyRow row;
        row.id = p.design_id;
        row.problem = p.problem;
        row.ratio = std::min(p.problem.d2_i / p.plan.d1_i, p.problem.d2_j / p.plan.d1_j);
        row.predicted_c = p.c_percent;
        row.simulated_c = p.simulated_c;
        row.tol = row.ratio >= policy.large_ratio ? policy.tol : policy.tol_small;

        const ReferenceRecord* rec = refs.find(p.design_id);
        const ReferenceMeasurement* meas = nullptr;
        if (rec) {
            for (const auto& m : rec->measurements)
                if (m.problem == p.problem) meas = &m;
        }
        if (!meas) {
            row.status = RowStatus::NoReference;
        } else {
            row.ref_e_d = meas->e_d;
            row.delta = std::abs(p.c_percent - meas->e_d);
            if (rec->exclude_efficiency) {
                row.status = RowStatus::Excluded;
                row.note = rec->note;
            } else {
                row.status = *row.delta <= row.tol ? RowStatus::Pass : RowStatus::Fail;
            }
        }
        report.efficiency.push_back(std::move(row));
    }
    return report;
}

}  // namespace sa3d
