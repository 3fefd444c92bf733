// report.hpp - text tables and CSV for estimates, simulations, DSE sweeps
// and reference comparisons. All output is deterministic for a given input.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sa3d/dse.hpp"

namespace sa3d {

enum class Format { Table, Csv };

Format parse_format(const std::string& text);

// Columns padded to their widest cell; numbers right-aligned.
class TextTable {
public:
    explicit TextTable(std::vector<std::string> header);
    void add(std::vector<std::string> row);
    std::string render(Format format) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string fmt_fixed(double v, int digits);

std::string estimate_report(const DesignPoint& point, const ProblemShape& problem,
                            const PerfEstimate& est, Format format);

std::string simulation_report(const DesignPoint& point, const ProblemShape& problem,
                              const SimulationOutcome& sim, std::uint64_t seed, Format format);

// `estimates[n]` belongs to `points[n]`; infeasible points carry nullopt.
std::string dse_report(const std::vector<DesignPoint>& points,
                       const std::vector<std::optional<PerfEstimate>>& estimates,
                       const ProblemShape& problem, Format format);

std::string compare_report(const CompareReport& report, const ReferenceSet& refs, Format format);

}  // namespace sa3d
