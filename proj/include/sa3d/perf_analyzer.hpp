// perf_analyzer.hpp - throughput, stall and efficiency equations.
//
// Units: FLOPS and bytes are SI (1 GFLOPS = 1e9 FLOP/s, 1 MB = 1e6 bytes);
// clock frequencies are carried in MHz; bandwidth inside the model is
// bytes/cycle, converted from MB/s only at the boundary.
#pragma once

#include "sa3d/core_model.hpp"

namespace sa3d {

struct PerfEstimate {
    Count n_dsp = 0;
    Count n_pe = 0;
    double t_peak = 0.0;        // FLOPS
    Count b_a = 0;              // floats/cycle into the A face
    Count b_b = 0;
    Count l_body = 0;           // cycles
    Count l_tot = 0;            // cycles for one (d0_i x d2_k)(d2_k x d0_j) product
    double c_percent = 0.0;     // fraction of pipeline iterations that compute
    double t_pred = 0.0;        // c_percent * t_peak, FLOPS
    double stall = 0.0;         // worst read-stream stall rate
    Count flops = 0;            // FLOP of the whole problem
    double predicted_cycles = 0.0;  // whole run, iteration model plus one fill
};

struct DotUnitThroughput {
    Count t_flop = 0;   // FLOP/cycle
    Count b_in = 0;     // floats/cycle
};

struct ClassicalThroughput {
    Count t_flop = 0;
    Count b_a = 0;
    Count b_b = 0;
};

// 2 * n_dsp * fmax, in FLOPS.
double t_peak(Count n_dsp, const ClockSpec& clock);

double to_gflops(double flops);

// Controller throughput e * B_ddr expressed in bytes/cycle at fmax.
double controller_bytes_per_cycle(const MemorySpec& mem, const ClockSpec& clock);

// Fraction of requests the controller cannot serve; 0 when
// request * fmax <= e * B_ddr, else 1 - e * B_ddr / (request * fmax).
double stall_rate(double request_bytes_per_cycle, const ClockSpec& clock, const MemorySpec& mem);

// Throughput of a loop body running with the given stall rate.
double effective_throughput(double nominal, double stall);

DotUnitThroughput dot_unit_model(Count d_p);
ClassicalThroughput classical_array_model(Count d0_i, Count d0_j);

// Fraction of fused-loop iterations in which the dot units compute:
//   (d2_k/d0_k) / (1 + d2_k/d0_k + d0_i d0_j / B_ddr)
double c_percent(const ArchShape& shape, const BlockingPlan& plan, const ProblemShape& problem,
                 const ClockSpec& clock);

// d2_i * d2_j * (2 d2_k - 1)
Count flop_count(const ProblemShape& problem);

double efficiency(double t_measured, double t_peak);

PerfEstimate estimate(const ArchShape& shape, const BlockingPlan& plan, const ProblemShape& problem,
                      const ClockSpec& clock, const MemorySpec& mem,
                      const LatencyProfile& lat = LatencyProfile());

}  // namespace sa3d
