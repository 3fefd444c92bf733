// dse.hpp - design-space exploration: enumerating grid shapes under a DSP
// budget, predicting and simulating design points, and comparing results
// with published measurements.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sa3d/blocked_runner.hpp"
#include "sa3d/config_io.hpp"
#include "sa3d/core_model.hpp"
#include "sa3d/perf_analyzer.hpp"

namespace sa3d {

struct DesignPoint {
    ArchShape shape;
    ClockSpec clock;
    MemorySpec mem;
    BlockingPlan plan;
    LatencyProfile lat;
    Constraints constraints;
    bool feasible = false;
    std::vector<std::string> violations;

    bool operator==(const DesignPoint&) const = default;
};

// Builds the plan and checks the constraints. Never throws for plan or
// budget failures: those become violations.
DesignPoint make_design_point(const DesignConfig& cfg);
DesignConfig to_config(const DesignPoint& point, std::optional<ProblemShape> problem = std::nullopt);

struct Range {
    Count lo = 1;
    Count hi = 1;
    Count step = 1;
};

// "lo:hi" or "lo:hi:step" or a single value.
Range parse_range(const std::string& text);

struct EnumerationSpec {
    Count budget = 0;
    Range d0_i, d0_j, d0_k, d_p;
    ClockSpec clock;
    MemorySpec mem;
    LatencyProfile lat;
    std::optional<Count> max_dp;
};

// Lexicographic in (d0_i, d0_j, d0_k, d_p). Shapes whose d_p does not divide
// d0_k are skipped; shapes above the budget are not returned.
std::vector<DesignPoint> enumerate(const EnumerationSpec& spec);

PerfEstimate predict(const DesignPoint& point, const ProblemShape& problem);

// Evaluates predict() for every point, `jobs` at a time, and returns results
// in input order. Infeasible points yield std::nullopt.
std::vector<std::optional<PerfEstimate>> predict_all(const std::vector<DesignPoint>& points,
                                                     const ProblemShape& problem, unsigned jobs);

enum class Fidelity { Functional, Blocked, Counts };

Fidelity parse_fidelity(const std::string& text);
const char* to_string(Fidelity f);

struct SimulationOutcome {
    Fidelity fidelity = Fidelity::Blocked;
    SimStats stats;
    std::uint64_t result_hash = 0;   // 0 for count-only runs
    bool checked = false;            // compared against the reference product
    bool bitwise_match = false;
    double max_rel_error = 0.0;
    std::vector<std::string> audit;  // traffic violations (blocked/counts)
};

// Functional: every d0_i x d0_j tile of C is produced by successive block
//   MACs on the systolic grid over the whole K (no memory schedule).
// Blocked: numeric four-phase run with traffic counters.
// Counts: four-phase schedule without operands.
SimulationOutcome simulate(const DesignPoint& point, const ProblemShape& problem, Fidelity fidelity,
                           std::uint64_t seed, Fill fill = Fill::SmallInt);

// ---------------------------------------------------------------------------
// Reference data and comparison
// ---------------------------------------------------------------------------

struct ReferenceMeasurement {
    ProblemShape problem;
    double t_flops_gflops = 0.0;
    double e_d = 0.0;
};

struct ReferenceRecord {
    std::string id;
    ArchShape shape;
    Count n_dsp = 0;
    Count n_pe = 0;
    bool fitter_failed = false;
    std::optional<double> fmax_mhz;
    std::optional<double> t_peak_gflops;
    std::optional<std::pair<Count, Count>> d1;
    bool exclude_efficiency = false;
    std::string note;
    std::vector<ReferenceMeasurement> measurements;
};

struct ReferenceSet {
    int version = 0;
    std::string description;
    std::vector<ReferenceRecord> designs;

    const ReferenceRecord* find(const std::string& id) const;
};

ReferenceSet parse_references(const std::string& json_text);
ReferenceSet load_references(const std::filesystem::path& path);

struct ComparePolicy {
    double tol = 0.02;          // |c% - e_D| bound once d2/d1 >= large_ratio
    double tol_small = 0.05;    // bound for smaller problems
    Count large_ratio = 4;
    double peak_tol_gflops = 1.0;
    MemorySpec mem;
    bool simulate = false;      // also run the count-only schedule
};

struct Prediction {
    std::string design_id;
    ArchShape shape;
    ClockSpec clock;
    BlockingPlan plan;
    ProblemShape problem;
    double c_percent = 0.0;
    std::optional<double> simulated_c;
};

// One prediction per (design, measured problem) of every fitted design.
std::vector<Prediction> predictions_for(const ReferenceSet& refs, const ComparePolicy& policy);

enum class RowStatus { Pass, Fail, Excluded, NoReference };
const char* to_string(RowStatus s);

struct ResourceRow {
    std::string id;
    Count n_dsp = 0, ref_n_dsp = 0;
    Count n_pe = 0, ref_n_pe = 0;
    std::optional<double> fmax_mhz;
    std::optional<double> t_peak_gflops, ref_t_peak_gflops;
    RowStatus status = RowStatus::Pass;
    std::string note;
};

struct EfficiencyRow {
    std::string id;
    ProblemShape problem;
    Count ratio = 0;                   // min(d2_i/d1_i, d2_j/d1_j)
    double predicted_c = 0.0;
    std::optional<double> simulated_c;
    std::optional<double> ref_e_d;
    std::optional<double> delta;
    double tol = 0.0;
    RowStatus status = RowStatus::Pass;
    std::string note;
};

struct CompareReport {
    std::vector<ResourceRow> resources;
    std::vector<EfficiencyRow> efficiency;

    // No row failed (excluded and no-reference rows do not count).
    bool all_pass() const;
};

CompareReport compare(const std::vector<Prediction>& predictions, const ReferenceSet& refs,
                      const ComparePolicy& policy);

}  // namespace sa3d
