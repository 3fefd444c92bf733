// blocked_runner.hpp - two-level blocked off-chip multiplication executed
// under the four-phase schedule of the fused single-loop design.
//
// For every C block (I, J) of size d1_i x d1_j:
//   1. Read   panel 0 of A (d1_i x d0_k) and B (d0_k x d1_j), zero the FIFOs
//   2. Read   panel k+1 while computing panel k, k = 0 .. d2_k/d0_k - 2
//   3. Compute the last panel
//   4. Write  the block, d0_j floats per iteration, stalled by the DDR tier
// Each read/compute round takes r_A * r_B iterations: that is the number of
// d0_i x d0_j tiles in the block, and also the number of b_g-wide reads
// needed to fetch one panel. Fidelity is per iteration; pipeline fill between
// phases is not modelled.
#pragma once

#include <deque>
#include <string>
#include <vector>

#include "sa3d/core_model.hpp"
#include "sa3d/matrix.hpp"

namespace sa3d {

struct SimStats {
    Count blocks = 0;
    Count it_read_init = 0;
    Count it_steady = 0;
    Count it_tail = 0;
    Count it_write = 0;
    Count it_comp = 0;
    Count it_tot = 0;
    Count elements_read_A = 0;
    Count elements_read_B = 0;
    Count elements_written_C = 0;
    double measured_c = 0.0;
    Count cycles_total = 0;       // it_tot + one pipeline fill (l_body)
    Count read_stall_cycles = 0;
    Count write_stall_cycles = 0;
    Count peak_mapped_A = 0;      // elements
    Count peak_mapped_B = 0;
    Count peak_fifo = 0;

    bool operator==(const SimStats&) const = default;
};

std::string to_key_value(const SimStats& stats);
std::string sim_stats_csv_header();
std::string to_csv_row(const SimStats& stats);

enum class Stream { A, B, C };

// Global-memory side: one LSU stream per matrix, each behind its own
// controller. Counts traffic and the stall cycles implied by the controller
// throughput.
class GlobalMemModel {
public:
    GlobalMemModel(const MemorySpec& mem, const ClockSpec& clock);

    // True when `floats_per_cycle` exceeds what the controller can serve.
    bool stalls(Count floats_per_cycle) const;

    // Moves `elements` floats at `width` floats per iteration and returns the
    // number of iterations the transfer occupies.
    Count read(Stream s, Count elements, Count width);
    Count write(Count elements, Count width);
    void add_stall_cycles(Stream s, Count cycles);

    Count elements(Stream s) const;
    Count stall_cycles(Stream s) const;

private:
    Count charge(Stream s, Count elements, Count width);

    MemorySpec mem_;
    ClockSpec clock_;
    Count elements_[3] = {0, 0, 0};
    Count stall_cycles_[3] = {0, 0, 0};
};

// On-chip side: two mapped memory systems that double-buffer one k-panel of
// A and of B each, and the FIFO system that holds one C block.
//   A: d0_i*d0_k partitions of depth 2*r_B
//   B: d0_j*d0_k partitions of depth 2*r_A
//   C: d0_i*d0_j FIFOs of depth r_A*r_B
class OnChipModel {
public:
    OnChipModel(const ArchShape& shape, const BlockingPlan& plan, bool store_values);

    // Element (row, kk) of the A panel held in `buffer`, row < d1_i, kk < d0_k.
    void store_a(int buffer, Count row, Count kk, float v);
    float load_a(int buffer, Count row, Count kk) const;
    // Element (kk, col) of the B panel, col < d1_j.
    void store_b(int buffer, Count kk, Count col, float v);
    float load_b(int buffer, Count kk, Count col) const;

    // Occupancy bookkeeping in elements; throws std::logic_error when a
    // buffer would exceed its partition depth.
    void fill(Stream s, int buffer, Count elements);
    void release(Stream s, int buffer);

    void fifo_push(Count ii, Count jj, float v);
    float fifo_pop(Count ii, Count jj);
    // Occupancy of the whole FIFO system in tiles (one element per FIFO).
    void fifo_fill_tiles(Count tiles);
    void fifo_drain_tiles(Count tiles);

    Count mapped_capacity(Stream s) const;
    Count fifo_capacity() const;
    Count peak_mapped(Stream s) const { return s == Stream::A ? peak_a_ : peak_b_; }
    Count peak_fifo() const { return peak_fifo_; }

private:
    std::size_t a_addr(int buffer, Count row, Count kk) const;
    std::size_t b_addr(int buffer, Count kk, Count col) const;

    ArchShape shape_;
    BlockingPlan plan_;
    bool store_;
    std::vector<float> a_mem_;   // partition-major: [partition][address]
    std::vector<float> b_mem_;
    std::vector<std::deque<float>> fifos_;
    Count occ_a_[2] = {0, 0};
    Count occ_b_[2] = {0, 0};
    Count occ_fifo_ = 0;
    Count peak_a_ = 0;
    Count peak_b_ = 0;
    Count peak_fifo_ = 0;
};

struct BlockedConfig {
    ArchShape shape;
    BlockingPlan plan;
    ProblemShape problem;
    MemorySpec mem;
    ClockSpec clock;
    LatencyProfile lat;
};

struct BlockedResult {
    Matrix c;
    SimStats stats;
};

// Numeric run. A must be column-major and B row-major; C comes back row-major.
BlockedResult run_blocked(const Matrix& a, const Matrix& b, const BlockedConfig& cfg);
BlockedResult run_blocked(const Matrix& a, const Matrix& b, const ArchShape& shape,
                          const BlockingPlan& plan, const ProblemShape& problem,
                          const MemorySpec& mem, const ClockSpec& clock);

// Same schedule without operands: only the counters. Produces the same
// SimStats as run_blocked and scales to full-size problems.
SimStats run_blocked_counts(const BlockedConfig& cfg);

// Read/write volume identities of the blocked schedule; empty when all hold.
std::vector<std::string> traffic_audit(const SimStats& stats, const ProblemShape& problem,
                                       const BlockingPlan& plan);

// max(1, d0_j / DDR tier): slowdown of the Write phase.
double write_stall_factor(const ArchShape& shape, const ClockSpec& clock);

// Iterations of one block's Write phase: ceil(d1_i d1_j / min(d0_j, tier)).
Count write_iterations(const ArchShape& shape, const BlockingPlan& plan, const ClockSpec& clock);

}  // namespace sa3d
