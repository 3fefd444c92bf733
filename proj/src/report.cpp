#include "sa3d/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace sa3d {
namespace {

bool looks_numeric(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e';
    });
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (std::size_t n = 0; n < items.size(); ++n) {
        if (n) out += sep;
        out += items[n];
    }
    return out;
}

std::string gflops(double flops) { return fmt_fixed(to_gflops(flops), 1); }

std::string fmax_label(const ClockSpec& clock) { return fmt_fixed(clock.fmax_mhz, 1) + " (assumed)"; }

// Two-column key/value block used for single-design reports.
std::string key_values(const std::vector<std::pair<std::string, std::string>>& kv, Format format) {
    if (format == Format::Csv) {
        std::vector<std::string> keys, values;
        for (const auto& [k, v] : kv) {
            keys.push_back(csv_cell(k));
            values.push_back(csv_cell(v));
        }
        return join(keys, ",") + "\n" + join(values, ",") + "\n";
    }
    std::size_t width = 0;
    for (const auto& [k, _] : kv) width = std::max(width, k.size());
    std::string out;
    for (const auto& [k, v] : kv) out += k + std::string(width - k.size() + 2, ' ') + v + "\n";
    return out;
}

std::vector<std::pair<std::string, std::string>> design_fields(const DesignPoint& p) {
    const auto& s = p.shape;
    std::vector<std::pair<std::string, std::string>> kv = {
        {"d0_i", std::to_string(s.d0_i)},
        {"d0_j", std::to_string(s.d0_j)},
        {"d0_k", std::to_string(s.d0_k)},
        {"d_p", std::to_string(s.d_p)},
        {"n_dsp", std::to_string(dsp_count(s))},
        {"n_pe", std::to_string(pe_count(s))},
        {"fmax_mhz", fmax_label(p.clock)},
        {"ddr_floats_per_cycle", std::to_string(ddr_floats_per_cycle(p.clock))},
        {"d1_i", std::to_string(p.plan.d1_i)},
        {"d1_j", std::to_string(p.plan.d1_j)},
        {"b_gA", std::to_string(p.plan.b_gA)},
        {"b_gB", std::to_string(p.plan.b_gB)},
        {"r_A", std::to_string(p.plan.r_A)},
        {"r_B", std::to_string(p.plan.r_B)},
        {"d1_override", p.plan.overridden ? "yes" : "no"},
    };
    if (!p.plan.warnings.empty()) kv.emplace_back("plan_warnings", join(p.plan.warnings, "; "));
    return kv;
}

void add_problem(std::vector<std::pair<std::string, std::string>>& kv, const ProblemShape& problem) {
    kv.emplace_back("d2_i", std::to_string(problem.d2_i));
    kv.emplace_back("d2_j", std::to_string(problem.d2_j));
    kv.emplace_back("d2_k", std::to_string(problem.d2_k));
}

}  // namespace

Format parse_format(const std::string& text) {
    if (text == "table") return Format::Table;
    if (text == "csv") return Format::Csv;
    throw Error(ErrorKind::InvalidArgument, "unknown format '" + text + "'");
}

std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

TextTable::TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

void TextTable::add(std::vector<std::string> row) {
    row.resize(header_.size());
    rows_.push_back(std::move(row));
}

std::string TextTable::render(Format format) const {
    std::string out;
    if (format == Format::Csv) {
        auto line = [&](const std::vector<std::string>& cells) {
            std::vector<std::string> quoted;
            for (const auto& c : cells) quoted.push_back(csv_cell(c));
            out += join(quoted, ",") + "\n";
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }
    std::vector<std::size_t> width(header_.size());
    for (std::size_t c = 0; c < header_.size(); ++c) {
        width[c] = header_[c].size();
        for (const auto& r : rows_) width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells, bool is_header) {
        std::string s;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string pad(width[c] - cells[c].size(), ' ');
            const bool right = !is_header && looks_numeric(cells[c]);
            if (c) s += "  ";
            s += right ? pad + cells[c] : cells[c] + pad;
        }
        while (!s.empty() && s.back() == ' ') s.pop_back();
        out += s + "\n";
    };
    line(header_, true);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    for (const auto& r : rows_) line(r, false);
    return out;
}

std::string estimate_report(const DesignPoint& point, const ProblemShape& problem,
                            const PerfEstimate& est, Format format) {
    auto kv = design_fields(point);
    add_problem(kv, problem);
    kv.emplace_back("b_a", std::to_string(est.b_a));
    kv.emplace_back("b_b", std::to_string(est.b_b));
    kv.emplace_back("l_body", std::to_string(est.l_body));
    kv.emplace_back("l_tot", std::to_string(est.l_tot));
    kv.emplace_back("c_percent", fmt_fixed(est.c_percent, 4));
    kv.emplace_back("t_peak_gflops", gflops(est.t_peak));
    kv.emplace_back("t_pred_gflops", gflops(est.t_pred));
    kv.emplace_back("read_stall_rate", fmt_fixed(est.stall, 4));
    kv.emplace_back("flops", std::to_string(est.flops));
    kv.emplace_back("predicted_cycles", fmt_fixed(est.predicted_cycles, 0));
    const auto violations = validate_problem(problem, point.plan, point.shape);
    if (!violations.empty()) kv.emplace_back("problem_violations", join(violations, "; "));
    return key_values(kv, format);
}

std::string simulation_report(const DesignPoint& point, const ProblemShape& problem,
                              const SimulationOutcome& sim, std::uint64_t seed, Format format) {
    auto kv = design_fields(point);
    add_problem(kv, problem);
    kv.emplace_back("fidelity", to_string(sim.fidelity));
    kv.emplace_back("seed", std::to_string(seed));
    std::istringstream stats(to_key_value(sim.stats));
    for (std::string line; std::getline(stats, line);) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    if (sim.checked) {
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(sim.result_hash));
        kv.emplace_back("result_hash", hash);
        kv.emplace_back("bitwise_match", sim.bitwise_match ? "yes" : "no");
        kv.emplace_back("max_rel_error", fmt_fixed(sim.max_rel_error, 9));
    }
    kv.emplace_back("model_c_percent", fmt_fixed(c_percent(point.shape, point.plan, problem, point.clock), 4));
    kv.emplace_back("traffic_audit", sim.audit.empty() ? "ok" : join(sim.audit, "; "));
    return key_values(kv, format);
}

std::string dse_report(const std::vector<DesignPoint>& points,
                       const std::vector<std::optional<PerfEstimate>>& estimates,
                       const ProblemShape& problem, Format format) {
    TextTable t({"d0_i", "d0_j", "d0_k", "d_p", "n_dsp", "n_pe", "fmax_mhz", "d1_i", "d1_j", "r_A", "r_B",
                 "feasible", "c_percent", "t_peak_gflops", "t_pred_gflops", "stall", "notes"});
    for (std::size_t n = 0; n < points.size(); ++n) {
        const auto& p = points[n];
        std::vector<std::string> row = {std::to_string(p.shape.d0_i), std::to_string(p.shape.d0_j),
                                        std::to_string(p.shape.d0_k), std::to_string(p.shape.d_p),
                                        std::to_string(dsp_count(p.shape)), std::to_string(pe_count(p.shape)),
                                        fmt_fixed(p.clock.fmax_mhz, 1)};
        if (p.feasible) {
            row.push_back(std::to_string(p.plan.d1_i));
            row.push_back(std::to_string(p.plan.d1_j));
            row.push_back(std::to_string(p.plan.r_A));
            row.push_back(std::to_string(p.plan.r_B));
        } else {
            row.insert(row.end(), 4, "-");
        }
        row.push_back(p.feasible ? "yes" : "no");
        if (n < estimates.size() && estimates[n]) {
            const auto& e = *estimates[n];
            row.push_back(fmt_fixed(e.c_percent, 4));
            row.push_back(gflops(e.t_peak));
            row.push_back(gflops(e.t_pred));
            row.push_back(fmt_fixed(e.stall, 4));
        } else {
            row.insert(row.end(), 4, "-");
        }
        std::vector<std::string> notes = p.violations;
        notes.insert(notes.end(), p.plan.warnings.begin(), p.plan.warnings.end());
        row.push_back(join(notes, "; "));
        t.add(std::move(row));
    }
    std::string out;
    if (format == Format::Table) {
        out += "problem " + std::to_string(problem.d2_i) + "x" + std::to_string(problem.d2_j) + "x" +
               std::to_string(problem.d2_k) + ", " + std::to_string(points.size()) +
               " design points; fmax is an assumption, not a fitter result\n";
    }
    return out + t.render(format);
}

std::string compare_report(const CompareReport& report, const ReferenceSet& refs, Format format) {
    TextTable res({"design", "n_dsp", "ref_n_dsp", "n_pe", "ref_n_pe", "fmax_mhz", "t_peak_gflops",
                   "ref_t_peak_gflops", "status", "note"});
    for (const auto& r : report.resources) {
        res.add({r.id, std::to_string(r.n_dsp), std::to_string(r.ref_n_dsp), std::to_string(r.n_pe),
                 std::to_string(r.ref_n_pe), r.fmax_mhz ? fmt_fixed(*r.fmax_mhz, 0) : "-",
                 r.t_peak_gflops ? fmt_fixed(*r.t_peak_gflops, 1) : "-",
                 r.ref_t_peak_gflops ? fmt_fixed(*r.ref_t_peak_gflops, 0) : "-", to_string(r.status), r.note});
    }
    TextTable eff({"design", "d2_i", "d2_j", "d2_k", "d2/d1", "predicted_c", "simulated_c", "ref_e_d", "delta",
                   "tol", "status", "note"});
    for (const auto& r : report.efficiency) {
        eff.add({r.id, std::to_string(r.problem.d2_i), std::to_string(r.problem.d2_j),
                 std::to_string(r.problem.d2_k), std::to_string(r.ratio), fmt_fixed(r.predicted_c, 4),
                 r.simulated_c ? fmt_fixed(*r.simulated_c, 4) : "-", r.ref_e_d ? fmt_fixed(*r.ref_e_d, 2) : "-",
                 r.delta ? fmt_fixed(*r.delta, 4) : "-", fmt_fixed(r.tol, 2), to_string(r.status), r.note});
    }
    if (format == Format::Csv) return res.render(format) + "\n" + eff.render(format);

    auto count = [&](RowStatus s) {
        return std::count_if(report.efficiency.begin(), report.efficiency.end(),
                             [s](const EfficiencyRow& r) { return r.status == s; });
    };
    std::string out = "reference data version " + std::to_string(refs.version) + "\n";
    out += "fmax values are the measured clocks of the reference designs\n\n";
    out += "resources\n" + res.render(format) + "\n";
    out += "efficiency\n" + eff.render(format) + "\n";
    out += "rows: " + std::to_string(count(RowStatus::Pass)) + " pass, " + std::to_string(count(RowStatus::Fail)) +
           " fail, " + std::to_string(count(RowStatus::Excluded)) + " excluded, " +
           std::to_string(count(RowStatus::NoReference)) + " no-reference\n";
    out += std::string("result: ") + (report.all_pass() ? "PASS" : "FAIL") + "\n";
    return out;
}

}  // namespace sa3d
