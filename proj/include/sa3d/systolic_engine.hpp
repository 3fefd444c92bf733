// systolic_engine.hpp - functional execution of the wavefront kernel and the
// timing model of the 3D systolic grid.
//
// The functional executor replays the fully unrolled hardware loop as a
// sequential sweep over wavefront steps k = 0 .. d0_i + d0_j + d0_k - 3.
// PE (i,j) is active while i + j <= k < i + j + d0_k. Within a step PEs are
// visited with i and j descending so that reading a neighbour's register
// observes the value it latched in the previous step, which is exactly the
// one-cycle register hop of the hardware chains.
#pragma once

#include <iosfwd>
#include <vector>

#include "sa3d/core_model.hpp"
#include "sa3d/matrix.hpp"

namespace sa3d {

// One PE firing inside a wavefront sweep.
struct Activation {
    Count step = 0;          // wavefront index k
    Count i = 0;
    Count j = 0;
    Count kk = 0;            // k - i - j: position along the dot dimension
    Count layer = 0;         // kk / d_p
    Count a_injected_at = 0; // step at which the consumed A value entered column 0
    Count b_injected_at = 0; // step at which the consumed B value entered row 0
    bool forwards = false;   // last lane of a dot unit: partial sum leaves the layer
};

struct WavefrontTrace {
    Count steps = 0;
    std::vector<Activation> activations;
};

// Register file of the grid: the A/B propagation chains, the per-PE
// accumulators and the partial-sum carriers in the L direction.
class GridState {
public:
    explicit GridState(const ArchShape& shape);

    const ArchShape& shape() const { return shape_; }

    float& a(Count i, Count j) { return a_prop_[idx(i, j)]; }
    float& b(Count i, Count j) { return b_prop_[idx(i, j)]; }
    float& c(Count i, Count j) { return c_acc_[idx(i, j)]; }
    Count& a_tag(Count i, Count j) { return a_tag_[idx(i, j)]; }
    Count& b_tag(Count i, Count j) { return b_tag_[idx(i, j)]; }

    // Number of partial sums handed from layer L to L+1 (or out of the top
    // layer) at PE (i,j) since construction.
    Count& forwards(Count i, Count j) { return forwards_[idx(i, j)]; }
    Count forwards(Count i, Count j) const { return forwards_[idx(i, j)]; }

private:
    std::size_t idx(Count i, Count j) const { return static_cast<std::size_t>(i * shape_.d0_j + j); }

    ArchShape shape_;
    std::vector<float> a_prop_;
    std::vector<float> b_prop_;
    std::vector<float> c_acc_;
    std::vector<Count> a_tag_;
    std::vector<Count> b_tag_;
    std::vector<Count> forwards_;
};

class SystolicGrid {
public:
    explicit SystolicGrid(const ArchShape& shape);

    const ArchShape& shape() const { return state_.shape(); }

    // C += A0 * B0 with C (d0_i x d0_j), A0 (d0_i x d0_k), B0 (d0_k x d0_j).
    void mac(Matrix& c, const Matrix& a0, const Matrix& b0, WavefrontTrace* trace = nullptr);

    Count wavefront_steps() const;
    Count macs_executed() const { return macs_; }
    const GridState& state() const { return state_; }

private:
    GridState state_;
    Count macs_ = 0;
};

// Pure form of SystolicGrid::mac: returns C + A0 * B0.
Matrix systolic_block_mac(const Matrix& c, const Matrix& a0, const Matrix& b0,
                          const ArchShape& shape, WavefrontTrace* trace = nullptr);

// Full (d0_i x K) * (K x d0_j) product as K/d0_k successive block MACs into
// one zero-initialised accumulator.
Matrix systolic_matmul(const Matrix& a, const Matrix& b, const ArchShape& shape);

// Per-activation CSV (step,i,j,kk,layer,a_injected_at,b_injected_at,forwards).
// Only grids with every dimension <= 8 may be dumped.
void write_trace_csv(const WavefrontTrace& trace, const ArchShape& shape, std::ostream& os);

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

struct TimingReport {
    Count l_body = 0;      // cycles for one iteration to traverse the pipeline
    Count l_tot = 0;       // cycle at which the last result leaves the grid
    Count fill = 0;        // cycles for the wavefront to reach the far corner PE
    Count iterations = 0;  // pipeline iterations (II = 1)
    Count events = 0;      // processed events (event simulation only)

    bool operator==(const TimingReport& o) const {
        return l_body == o.l_body && l_tot == o.l_tot && fill == o.fill &&
               iterations == o.iterations;
    }
};

// 2D grid of multiply-accumulate units: l_tot = d0_i + d0_j + K - 1 + l_mac.
TimingReport timing_classical(Count d0_i, Count d0_j, Count K, const LatencyProfile& lat);

// 3D grid: l_tot = d0_i + d0_j + K/d0_k - 1 + (d0_k/d_p) l_dot(d_p),
//          l_body = d0_i + d0_j - 1 + (d0_k/d_p) l_dot(d_p).
TimingReport timing_3d(const ArchShape& shape, Count K, const LatencyProfile& lat);

// Discrete-event replay of the skewed injection timetable: operand bundles
// enter the A and B faces, move one register hop per cycle, each layer
// charges l_dot(d_p) and the top layer's result leaves through one output
// register. Independent of the closed forms above.
TimingReport event_sim_timing(const ArchShape& shape, Count K, const LatencyProfile& lat);

// Same event model for a single-layer grid of MAC units (l_dot := l_mac).
TimingReport event_sim_timing_classical(Count d0_i, Count d0_j, Count K, const LatencyProfile& lat);

}  // namespace sa3d
