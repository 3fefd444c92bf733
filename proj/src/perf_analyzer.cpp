#include "sa3d/perf_analyzer.hpp"

#include <algorithm>

#include "sa3d/systolic_engine.hpp"

namespace sa3d {

double t_peak(Count n_dsp, const ClockSpec& clock) {
    if (n_dsp < 1) throw Error(ErrorKind::InvalidArgument, "DSP count must be >= 1");
    return 2.0 * static_cast<double>(n_dsp) * clock.fmax_mhz * 1e6;
}

double to_gflops(double flops) { return flops / 1e9; }

double controller_bytes_per_cycle(const MemorySpec& mem, const ClockSpec& clock) {
    // (MB/s * 1e6) / (MHz * 1e6)
    return mem.efficiency * mem.bank_mb_s / clock.fmax_mhz;
}

double stall_rate(double request_bytes_per_cycle, const ClockSpec& clock, const MemorySpec& mem) {
    validate(mem);
    if (!(request_bytes_per_cycle > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "request throughput must be positive");
    }
    if (!(clock.fmax_mhz > 0.0)) throw Error(ErrorKind::InvalidArgument, "fmax must be positive");
    const double requested = request_bytes_per_cycle * clock.fmax_mhz;  // MB/s
    const double served = mem.efficiency * mem.bank_mb_s;
    if (requested <= served) return 0.0;
    return 1.0 - served / requested;
}

double effective_throughput(double nominal, double stall) { return (1.0 - stall) * nominal; }

DotUnitThroughput dot_unit_model(Count d_p) {
    if (d_p < 1) throw Error(ErrorKind::InvalidArgument, "d_p must be >= 1");
    return {2 * d_p, 2 * d_p + 1};
}

ClassicalThroughput classical_array_model(Count d0_i, Count d0_j) {
    if (d0_i < 1 || d0_j < 1) throw Error(ErrorKind::InvalidShape, "grid sizes must be >= 1");
    return {2 * d0_i * d0_j, d0_i, d0_j};
}

double c_percent(const ArchShape& shape, const BlockingPlan& /*plan*/, const ProblemShape& problem,
                 const ClockSpec& clock) {
    validate(shape);
    const double rounds = static_cast<double>(problem.d2_k) / static_cast<double>(shape.d0_k);
    const double write = static_cast<double>(shape.d0_i * shape.d0_j) /
                         static_cast<double>(ddr_floats_per_cycle(clock));
    return rounds / (1.0 + rounds + write);
}

Count flop_count(const ProblemShape& p) { return p.d2_i * p.d2_j * (2 * p.d2_k - 1); }

double efficiency(double t_measured, double peak) {
    if (!(peak > 0.0)) throw Error(ErrorKind::InvalidArgument, "peak throughput must be positive");
    return t_measured / peak;
}

PerfEstimate estimate(const ArchShape& shape, const BlockingPlan& plan, const ProblemShape& problem,
                      const ClockSpec& clock, const MemorySpec& mem, const LatencyProfile& lat) {
    PerfEstimate e;
    e.n_dsp = dsp_count(shape);
    e.n_pe = pe_count(shape);
    e.t_peak = t_peak(e.n_dsp, clock);
    const auto io = io_throughput(shape);
    e.b_a = io.b_a;
    e.b_b = io.b_b;

    const Count k_for_timing = problem.d2_k % shape.d0_k == 0 ? problem.d2_k : shape.d0_k;
    const auto timing = timing_3d(shape, k_for_timing, lat);
    e.l_body = timing.l_body;
    e.l_tot = timing.l_tot;

    e.c_percent = c_percent(shape, plan, problem, clock);
    e.t_pred = e.c_percent * e.t_peak;
    e.stall = std::max(stall_rate(4.0 * static_cast<double>(plan.b_gA), clock, mem),
                       stall_rate(4.0 * static_cast<double>(plan.b_gB), clock, mem));
    e.flops = flop_count(problem);

    const double blocks = static_cast<double>(problem.d2_i) / static_cast<double>(plan.d1_i) *
                          static_cast<double>(problem.d2_j) / static_cast<double>(plan.d1_j);
    const double compute_iters = blocks * static_cast<double>(plan.r_A * plan.r_B) *
                                 static_cast<double>(problem.d2_k) / static_cast<double>(shape.d0_k);
    e.predicted_cycles = compute_iters / e.c_percent + static_cast<double>(e.l_body);
    return e;
}

}  // namespace sa3d
