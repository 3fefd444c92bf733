// core_model.hpp - configuration symbols of the 3D systolic array and the
// closed-form relations between them.
//
//   ArchShape     d0_i x d0_j grid of PEs, d0_k/d_p layers, dot units of size d_p
//   ClockSpec     design clock (always an input, never derived)
//   MemorySpec    DDR controller throughput and efficiency
//   BlockingPlan  first-level block sizes d1_i/d1_j and the reuse ratios
//                 r_A/r_B that let one global-memory LSU per matrix feed the grid
//   ProblemShape  off-chip matrix sizes d2_i/d2_j/d2_k
//
// All types are plain values; every function here is pure.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sa3d/error.hpp"

namespace sa3d {

using Count = std::int64_t;

struct ArchShape {
    Count d0_i = 1;
    Count d0_j = 1;
    Count d0_k = 1;
    Count d_p = 1;

    // Number of PE layers in the L direction.
    Count layers() const { return d0_k / d_p; }

    bool operator==(const ArchShape&) const = default;
};

// Throws Error{InvalidShape} when a field is < 1 or d_p does not divide d0_k.
void validate(const ArchShape& shape);
std::string to_string(const ArchShape& shape);

// Pipeline latencies in cycles. The defaults are placeholder values for a
// Stratix-10-class fused multiply-add chain; they are not measured numbers.
class LatencyProfile {
public:
    LatencyProfile();
    LatencyProfile(Count l_mac, std::map<Count, Count> l_dot);

    Count l_mac() const { return l_mac_; }
    static constexpr Count register_hop() { return 1; }

    // Latency of a dot unit of size d_p. Sizes missing from the table are
    // interpolated (or extrapolated) linearly in log2(d_p) and rounded up.
    Count dot_latency(Count d_p) const;

    const std::map<Count, Count>& table() const { return l_dot_; }

    bool operator==(const LatencyProfile&) const = default;

private:
    Count l_mac_;
    std::map<Count, Count> l_dot_;
};

struct ClockSpec {
    double fmax_mhz = 368.0;
    bool operator==(const ClockSpec&) const = default;
};

struct MemorySpec {
    double bank_mb_s = 19200.0;   // DDR4-2400, 8 bytes per transfer
    double efficiency = 1.0;      // controller efficiency e, (0, 1]
    bool lsu_pow2 = true;         // warn when an LSU width is not a power of two

    bool operator==(const MemorySpec&) const = default;
};

void validate(const MemorySpec& mem);

struct ProblemShape {
    Count d2_i = 1;
    Count d2_j = 1;
    Count d2_k = 1;

    bool operator==(const ProblemShape&) const = default;
};

struct BlockingPlan {
    Count d1_i = 0;
    Count d1_j = 0;
    Count b_gA = 0;     // A floats read from global memory per cycle
    Count b_gB = 0;
    Count r_A = 0;      // each A element is reused r_A times on chip
    Count r_B = 0;
    bool overridden = false;            // d1 supplied by the caller
    std::vector<std::string> warnings;  // non-fatal discrepancies (LSU widths)

    bool operator==(const BlockingPlan&) const = default;
};

struct IoThroughput {
    Count b_a = 0;  // floats/cycle entering through the A face
    Count b_b = 0;
    bool operator==(const IoThroughput&) const = default;
};

Count dsp_count(const ArchShape& shape);
Count pe_count(const ArchShape& shape);
IoThroughput io_throughput(const ArchShape& shape);

// Maximum floats/cycle one global-memory LSU can request without stalling:
// 16 for 150 < fmax <= 300 MHz, 8 for 300 < fmax <= 600 MHz.
Count ddr_floats_per_cycle(const ClockSpec& clock);

// Default mode: b_g = DDR tier, r = ceil(B / b_g), d1_i = r_B d0_i, d1_j = r_A d0_j.
// Override mode: d1 must be multiples of d0; r = d1 / d0 and b_g = ceil(B / r)
// must not exceed the DDR tier.
BlockingPlan make_blocking_plan(const ArchShape& shape, const ClockSpec& clock,
                                const MemorySpec& mem,
                                std::optional<std::pair<Count, Count>> override_d1 = std::nullopt);

// Returns every violated divisibility constraint; empty when the problem can
// be run with the given plan.
std::vector<std::string> validate_problem(const ProblemShape& problem, const BlockingPlan& plan,
                                          const ArchShape& shape);

Count ceil_div(Count a, Count b);
bool is_pow2(Count v);

}  // namespace sa3d
