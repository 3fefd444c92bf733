#include "sa3d/core_model.hpp"

#include <cmath>
#include <iterator>
#include <sstream>

namespace sa3d {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidShape: return "invalid-shape";
        case ErrorKind::UnsupportedTier: return "unsupported-tier";
        case ErrorKind::InvalidPlan: return "invalid-plan";
        case ErrorKind::InvalidProblem: return "invalid-problem";
        case ErrorKind::DimensionMismatch: return "dimension-mismatch";
        case ErrorKind::LayoutMismatch: return "layout-mismatch";
        case ErrorKind::IndivisiblePartition: return "indivisible-partition";
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Count ceil_div(Count a, Count b) { return (a + b - 1) / b; }

bool is_pow2(Count v) { return v > 0 && (v & (v - 1)) == 0; }

void validate(const ArchShape& s) {
    if (s.d0_i < 1 || s.d0_j < 1 || s.d0_k < 1 || s.d_p < 1) {
        throw Error(ErrorKind::InvalidShape, "all shape fields must be >= 1, got " + to_string(s));
    }
    if (s.d0_k % s.d_p != 0) {
        throw Error(ErrorKind::InvalidShape,
                    "d0_k must be a multiple of d_p, got " + to_string(s));
    }
}

std::string to_string(const ArchShape& s) {
    std::ostringstream os;
    os << "(" << s.d0_i << "," << s.d0_j << "," << s.d0_k << ", d_p=" << s.d_p << ")";
    return os.str();
}

void validate(const MemorySpec& mem) {
    if (!(mem.bank_mb_s > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "bank bandwidth must be positive");
    }
    if (!(mem.efficiency > 0.0 && mem.efficiency <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "controller efficiency must lie in (0, 1]");
    }
}

// ---------------------------------------------------------------------------
// LatencyProfile
// ---------------------------------------------------------------------------

LatencyProfile::LatencyProfile() : LatencyProfile(6, {{1, 6}, {2, 8}, {4, 11}, {8, 15}}) {}

LatencyProfile::LatencyProfile(Count l_mac, std::map<Count, Count> l_dot)
    : l_mac_(l_mac), l_dot_(std::move(l_dot)) {
    if (l_mac_ < 0) {
        throw Error(ErrorKind::InvalidArgument, "l_mac must be >= 0");
    }
    if (l_dot_.empty()) {
        throw Error(ErrorKind::InvalidArgument, "dot latency table is empty");
    }
    Count prev = 0;
    for (const auto& [size, lat] : l_dot_) {
        if (size < 1 || lat < 1) {
            throw Error(ErrorKind::InvalidArgument, "dot sizes and latencies must be >= 1");
        }
        if (lat < prev) {
            throw Error(ErrorKind::InvalidArgument, "dot latency must be non-decreasing in d_p");
        }
        prev = lat;
    }
}

Count LatencyProfile::dot_latency(Count d_p) const {
    if (d_p < 1) {
        throw Error(ErrorKind::InvalidArgument, "d_p must be >= 1");
    }
    if (auto it = l_dot_.find(d_p); it != l_dot_.end()) {
        return it->second;
    }
    if (l_dot_.size() == 1) {
        return l_dot_.begin()->second;
    }
    // Pick the bracketing pair, or the nearest pair at either end.
    auto hi = l_dot_.upper_bound(d_p);
    if (hi == l_dot_.begin()) {
        hi = std::next(hi);
    } else if (hi == l_dot_.end()) {
        hi = std::prev(hi);
    }
    auto lo = std::prev(hi);

    const double x0 = std::log2(static_cast<double>(lo->first));
    const double x1 = std::log2(static_cast<double>(hi->first));
    const double x = std::log2(static_cast<double>(d_p));
    const double y0 = static_cast<double>(lo->second);
    const double y1 = static_cast<double>(hi->second);
    const double y = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    // 1e-9 absorbs log2 rounding for exact grid points.
    const auto cycles = static_cast<Count>(std::ceil(y - 1e-9));
    return cycles < 1 ? 1 : cycles;
}

// ---------------------------------------------------------------------------
// Derived quantities
// ---------------------------------------------------------------------------

Count dsp_count(const ArchShape& s) {
    validate(s);
    return s.d0_i * s.d0_j * s.d0_k;
}

Count pe_count(const ArchShape& s) {
    validate(s);
    return s.d0_i * s.d0_j * s.layers();
}

IoThroughput io_throughput(const ArchShape& s) {
    validate(s);
    return {s.d0_i * s.d0_k, s.d0_k * s.d0_j};
}

Count ddr_floats_per_cycle(const ClockSpec& clock) {
    const double f = clock.fmax_mhz;
    if (f > 150.0 && f <= 300.0) return 16;
    if (f > 300.0 && f <= 600.0) return 8;
    std::ostringstream os;
    os << "fmax " << f << " MHz is outside the supported DDR tiers (150, 600]";
    throw Error(ErrorKind::UnsupportedTier, os.str());
}

namespace {

void add_lsu_warnings(BlockingPlan& plan, const MemorySpec& mem) {
    if (!mem.lsu_pow2) return;
    auto check = [&](const char* name, Count width) {
        if (!is_pow2(width * 4)) {
            plan.warnings.push_back(std::string(name) + " = " + std::to_string(width) +
                                    " floats is not a power-of-two LSU width");
        }
    };
    check("b_gA", plan.b_gA);
    check("b_gB", plan.b_gB);
}

}  // namespace

BlockingPlan make_blocking_plan(const ArchShape& shape, const ClockSpec& clock,
                                const MemorySpec& mem,
                                std::optional<std::pair<Count, Count>> override_d1) {
    validate(shape);
    validate(mem);
    const Count tier = ddr_floats_per_cycle(clock);
    const IoThroughput io = io_throughput(shape);

    BlockingPlan plan;
    if (!override_d1) {
        plan.b_gA = tier;
        plan.b_gB = tier;
        plan.r_A = ceil_div(io.b_a, plan.b_gA);
        plan.r_B = ceil_div(io.b_b, plan.b_gB);
        plan.d1_i = plan.r_B * shape.d0_i;
        plan.d1_j = plan.r_A * shape.d0_j;
    } else {
        const auto [d1_i, d1_j] = *override_d1;
        if (d1_i < 1 || d1_j < 1 || d1_i % shape.d0_i != 0 || d1_j % shape.d0_j != 0) {
            std::ostringstream os;
            os << "override d1 = (" << d1_i << "," << d1_j << ") must be positive multiples of ("
               << shape.d0_i << "," << shape.d0_j << ")";
            throw Error(ErrorKind::InvalidPlan, os.str());
        }
        plan.overridden = true;
        plan.d1_i = d1_i;
        plan.d1_j = d1_j;
        plan.r_B = d1_i / shape.d0_i;
        plan.r_A = d1_j / shape.d0_j;
        plan.b_gA = ceil_div(io.b_a, plan.r_A);
        plan.b_gB = ceil_div(io.b_b, plan.r_B);
        if (plan.b_gA > tier || plan.b_gB > tier) {
            std::ostringstream os;
            os << "override d1 = (" << d1_i << "," << d1_j << ") needs global reads of ("
               << plan.b_gA << "," << plan.b_gB << ") floats/cycle, DDR tier allows " << tier;
            throw Error(ErrorKind::InvalidPlan, os.str());
        }
    }
    add_lsu_warnings(plan, mem);
    return plan;
}

std::vector<std::string> validate_problem(const ProblemShape& p, const BlockingPlan& plan,
                                          const ArchShape& shape) {
    std::vector<std::string> out;
    auto need = [&](const char* field, Count value, const char* by, Count divisor) {
        if (value < 1) {
            out.push_back(std::string(field) + " = " + std::to_string(value) + " must be >= 1");
        } else if (divisor < 1 || value % divisor != 0) {
            out.push_back(std::string(field) + " = " + std::to_string(value) +
                          " is not a multiple of " + by + " = " + std::to_string(divisor));
        }
    };
    need("d2_i", p.d2_i, "d1_i", plan.d1_i);
    need("d2_j", p.d2_j, "d1_j", plan.d1_j);
    need("d2_k", p.d2_k, "d0_k", shape.d0_k);
    return out;
}

}  // namespace sa3d
