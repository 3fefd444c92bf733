#include "sa3d/blocked_runner.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "sa3d/perf_analyzer.hpp"
#include "sa3d/systolic_engine.hpp"

namespace sa3d {

// ---------------------------------------------------------------------------
// SimStats serialisation
// ---------------------------------------------------------------------------

namespace {

template <typename Fn>
void for_each_field(const SimStats& s, Fn&& fn) {
    fn("blocks", std::to_string(s.blocks));
    fn("it_read_init", std::to_string(s.it_read_init));
    fn("it_steady", std::to_string(s.it_steady));
    fn("it_tail", std::to_string(s.it_tail));
    fn("it_write", std::to_string(s.it_write));
    fn("it_comp", std::to_string(s.it_comp));
    fn("it_tot", std::to_string(s.it_tot));
    fn("elements_read_A", std::to_string(s.elements_read_A));
    fn("elements_read_B", std::to_string(s.elements_read_B));
    fn("elements_written_C", std::to_string(s.elements_written_C));
    std::ostringstream c;
    c << std::fixed << std::setprecision(6) << s.measured_c;
    fn("measured_c", c.str());
    fn("cycles_total", std::to_string(s.cycles_total));
    fn("read_stall_cycles", std::to_string(s.read_stall_cycles));
    fn("write_stall_cycles", std::to_string(s.write_stall_cycles));
    fn("peak_mapped_A", std::to_string(s.peak_mapped_A));
    fn("peak_mapped_B", std::to_string(s.peak_mapped_B));
    fn("peak_fifo", std::to_string(s.peak_fifo));
}

}  // namespace

std::string to_key_value(const SimStats& s) {
    std::ostringstream os;
    for_each_field(s, [&](const char* k, const std::string& v) { os << k << '=' << v << '\n'; });
    return os.str();
}

std::string sim_stats_csv_header() {
    std::ostringstream os;
    bool first = true;
    for_each_field(SimStats{}, [&](const char* k, const std::string&) {
        os << (first ? "" : ",") << k;
        first = false;
    });
    return os.str();
}

std::string to_csv_row(const SimStats& s) {
    std::ostringstream os;
    bool first = true;
    for_each_field(s, [&](const char*, const std::string& v) {
        os << (first ? "" : ",") << v;
        first = false;
    });
    return os.str();
}

// ---------------------------------------------------------------------------
// GlobalMemModel
// ---------------------------------------------------------------------------

GlobalMemModel::GlobalMemModel(const MemorySpec& mem, const ClockSpec& clock)
    : mem_(mem), clock_(clock) {
    validate(mem_);
}

bool GlobalMemModel::stalls(Count floats_per_cycle) const {
    return 4.0 * static_cast<double>(floats_per_cycle) * clock_.fmax_mhz >
           mem_.efficiency * mem_.bank_mb_s;
}

Count GlobalMemModel::charge(Stream s, Count elements, Count width) {
    if (width < 1) throw Error(ErrorKind::InvalidArgument, "LSU width must be >= 1");
    const auto idx = static_cast<std::size_t>(s);
    elements_[idx] += elements;
    const Count iters = ceil_div(elements, width);
    // Write stalls are charged by the schedule in whole iterations.
    if (s != Stream::C && stalls(width)) {
        const double st = stall_rate(4.0 * static_cast<double>(width), clock_, mem_);
        stall_cycles_[idx] +=
            static_cast<Count>(std::ceil(static_cast<double>(iters) * st / (1.0 - st)));
    }
    return iters;
}

Count GlobalMemModel::read(Stream s, Count elements, Count width) {
    if (s == Stream::C) throw Error(ErrorKind::InvalidArgument, "C is write-only");
    return charge(s, elements, width);
}

Count GlobalMemModel::write(Count elements, Count width) { return charge(Stream::C, elements, width); }

void GlobalMemModel::add_stall_cycles(Stream s, Count cycles) {
    stall_cycles_[static_cast<std::size_t>(s)] += cycles;
}

Count GlobalMemModel::elements(Stream s) const { return elements_[static_cast<std::size_t>(s)]; }

Count GlobalMemModel::stall_cycles(Stream s) const {
    return stall_cycles_[static_cast<std::size_t>(s)];
}

// ---------------------------------------------------------------------------
// OnChipModel
// ---------------------------------------------------------------------------

OnChipModel::OnChipModel(const ArchShape& shape, const BlockingPlan& plan, bool store_values)
    : shape_(shape), plan_(plan), store_(store_values) {
    if (store_) {
        a_mem_.assign(static_cast<std::size_t>(mapped_capacity(Stream::A)), 0.0f);
        b_mem_.assign(static_cast<std::size_t>(mapped_capacity(Stream::B)), 0.0f);
        fifos_.resize(static_cast<std::size_t>(shape_.d0_i * shape_.d0_j));
    }
}

Count OnChipModel::mapped_capacity(Stream s) const {
    // partitions * depth
    if (s == Stream::A) return shape_.d0_i * shape_.d0_k * 2 * plan_.r_B;
    return shape_.d0_j * shape_.d0_k * 2 * plan_.r_A;
}

Count OnChipModel::fifo_capacity() const { return shape_.d0_i * shape_.d0_j * plan_.r_A * plan_.r_B; }

std::size_t OnChipModel::a_addr(int buffer, Count row, Count kk) const {
    const Count depth = 2 * plan_.r_B;
    const Count partition = (row % shape_.d0_i) * shape_.d0_k + kk;
    const Count address = buffer * plan_.r_B + row / shape_.d0_i;
    return static_cast<std::size_t>(partition * depth + address);
}

std::size_t OnChipModel::b_addr(int buffer, Count kk, Count col) const {
    const Count depth = 2 * plan_.r_A;
    const Count partition = kk * shape_.d0_j + col % shape_.d0_j;
    const Count address = buffer * plan_.r_A + col / shape_.d0_j;
    return static_cast<std::size_t>(partition * depth + address);
}

void OnChipModel::store_a(int buffer, Count row, Count kk, float v) { a_mem_[a_addr(buffer, row, kk)] = v; }
float OnChipModel::load_a(int buffer, Count row, Count kk) const { return a_mem_[a_addr(buffer, row, kk)]; }
void OnChipModel::store_b(int buffer, Count kk, Count col, float v) { b_mem_[b_addr(buffer, kk, col)] = v; }
float OnChipModel::load_b(int buffer, Count kk, Count col) const { return b_mem_[b_addr(buffer, kk, col)]; }

void OnChipModel::fill(Stream s, int buffer, Count elements) {
    Count* occ = s == Stream::A ? occ_a_ : occ_b_;
    occ[buffer] += elements;
    const Count total = occ[0] + occ[1];
    if (total > mapped_capacity(s)) {
        throw std::logic_error("mapped memory overflow on stream " +
                               std::string(s == Stream::A ? "A" : "B"));
    }
    Count& peak = s == Stream::A ? peak_a_ : peak_b_;
    peak = std::max(peak, total);
}

void OnChipModel::release(Stream s, int buffer) {
    Count* occ = s == Stream::A ? occ_a_ : occ_b_;
    occ[buffer] = 0;
}

void OnChipModel::fifo_push(Count ii, Count jj, float v) {
    auto& q = fifos_[static_cast<std::size_t>(ii * shape_.d0_j + jj)];
    if (static_cast<Count>(q.size()) >= plan_.r_A * plan_.r_B) {
        throw std::logic_error("C FIFO overflow");
    }
    q.push_back(v);
}

float OnChipModel::fifo_pop(Count ii, Count jj) {
    auto& q = fifos_[static_cast<std::size_t>(ii * shape_.d0_j + jj)];
    if (q.empty()) throw std::logic_error("C FIFO underflow");
    const float v = q.front();
    q.pop_front();
    return v;
}

void OnChipModel::fifo_fill_tiles(Count tiles) {
    occ_fifo_ += tiles * shape_.d0_i * shape_.d0_j;
    if (occ_fifo_ > fifo_capacity()) throw std::logic_error("C FIFO system overflow");
    peak_fifo_ = std::max(peak_fifo_, occ_fifo_);
}

void OnChipModel::fifo_drain_tiles(Count tiles) {
    occ_fifo_ -= tiles * shape_.d0_i * shape_.d0_j;
    if (occ_fifo_ < 0) throw std::logic_error("C FIFO system underflow");
}

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

double write_stall_factor(const ArchShape& shape, const ClockSpec& clock) {
    const double ratio = static_cast<double>(shape.d0_j) /
                         static_cast<double>(ddr_floats_per_cycle(clock));
    return std::max(1.0, ratio);
}

Count write_iterations(const ArchShape& shape, const BlockingPlan& plan, const ClockSpec& clock) {
    const Count width = std::min(shape.d0_j, ddr_floats_per_cycle(clock));
    return ceil_div(plan.d1_i * plan.d1_j, width);
}

namespace {

void check_config(const BlockedConfig& cfg) {
    validate(cfg.shape);
    const auto violations = validate_problem(cfg.problem, cfg.plan, cfg.shape);
    if (!violations.empty()) {
        std::string msg = "problem does not fit the blocking plan:";
        for (const auto& v : violations) msg += " " + v + ";";
        throw Error(ErrorKind::InvalidProblem, msg);
    }
    const auto& p = cfg.plan;
    if (p.r_A < 1 || p.r_B < 1 || p.d1_i != p.r_B * cfg.shape.d0_i ||
        p.d1_j != p.r_A * cfg.shape.d0_j) {
        throw Error(ErrorKind::InvalidPlan, "blocking plan is inconsistent with the shape");
    }
}

// Walks the four-phase schedule. With operands attached, every iteration
// also moves data through the on-chip model and drives the systolic grid.
class BlockedSchedule {
public:
    BlockedSchedule(const BlockedConfig& cfg, const Matrix* a, const Matrix* b)
        : cfg_(cfg),
          a_(a),
          b_(b),
          mem_(cfg.mem, cfg.clock),
          chip_(cfg.shape, cfg.plan, a != nullptr),
          grid_(cfg.shape) {
        if (numeric()) {
            c_ = Matrix(cfg.problem.d2_i, cfg.problem.d2_j, Layout::RowMajor);
            a_tile_ = Matrix(cfg.shape.d0_i, cfg.shape.d0_k);
            b_tile_ = Matrix(cfg.shape.d0_k, cfg.shape.d0_j);
            c_tile_ = Matrix(cfg.shape.d0_i, cfg.shape.d0_j);
        }
    }

    void run() {
        const auto& pr = cfg_.problem;
        const auto& pl = cfg_.plan;
        for (Count I = 0; I < pr.d2_i / pl.d1_i; ++I) {
            for (Count J = 0; J < pr.d2_j / pl.d1_j; ++J) run_block(I, J);
        }
        stats_.elements_read_A = mem_.elements(Stream::A);
        stats_.elements_read_B = mem_.elements(Stream::B);
        stats_.elements_written_C = mem_.elements(Stream::C);
        stats_.read_stall_cycles = mem_.stall_cycles(Stream::A) + mem_.stall_cycles(Stream::B);
        stats_.write_stall_cycles = mem_.stall_cycles(Stream::C);
        stats_.it_comp = stats_.it_steady + stats_.it_tail;
        stats_.it_tot = stats_.it_read_init + stats_.it_steady + stats_.it_tail + stats_.it_write;
        stats_.measured_c = stats_.it_tot ? static_cast<double>(stats_.it_comp) /
                                                static_cast<double>(stats_.it_tot)
                                          : 0.0;
        stats_.cycles_total = stats_.it_tot + timing_3d(cfg_.shape, cfg_.shape.d0_k, cfg_.lat).l_body;
        stats_.peak_mapped_A = chip_.peak_mapped(Stream::A);
        stats_.peak_mapped_B = chip_.peak_mapped(Stream::B);
        stats_.peak_fifo = chip_.peak_fifo();

        if (numeric() && (moved_a_ != stats_.elements_read_A || moved_b_ != stats_.elements_read_B ||
                          moved_c_ != stats_.elements_written_C)) {
            throw std::logic_error("data moved by the numeric run disagrees with the traffic counters");
        }
    }

    const SimStats& stats() const { return stats_; }
    Matrix take_result() { return std::move(c_); }

private:
    bool numeric() const { return a_ != nullptr; }
    Count round_iterations() const { return cfg_.plan.r_A * cfg_.plan.r_B; }
    Count panels() const { return cfg_.problem.d2_k / cfg_.shape.d0_k; }

    // Global reads of one k-panel into `buffer`; returns iterations needed.
    Count read_panel(Count I, Count J, Count panel, int buffer) {
        const auto& s = cfg_.shape;
        const auto& pl = cfg_.plan;
        const Count a_elems = pl.d1_i * s.d0_k;
        const Count b_elems = s.d0_k * pl.d1_j;
        const Count ia = mem_.read(Stream::A, a_elems, pl.b_gA);
        const Count ib = mem_.read(Stream::B, b_elems, pl.b_gB);
        chip_.fill(Stream::A, buffer, a_elems);
        chip_.fill(Stream::B, buffer, b_elems);
        const Count iters = std::max(ia, ib);
        if (iters > round_iterations()) {
            throw std::logic_error("panel read does not fit in one round");
        }
        if (numeric()) {
            pending_ = {I, J, panel, buffer, 0, 0};
        }
        return iters;
    }

    // Numeric part of one read iteration: b_gA floats of A (column order,
    // matching column-major storage) and b_gB floats of B (row order).
    void read_step() {
        if (!numeric() || pending_.panel < 0) return;
        const auto& s = cfg_.shape;
        const auto& pl = cfg_.plan;
        const Count a_elems = pl.d1_i * s.d0_k;
        const Count b_elems = s.d0_k * pl.d1_j;
        for (Count n = 0; n < pl.b_gA && pending_.a_done < a_elems; ++n, ++pending_.a_done) {
            const Count kk = pending_.a_done / pl.d1_i;
            const Count row = pending_.a_done % pl.d1_i;
            chip_.store_a(pending_.buffer, row, kk,
                          (*a_)(pending_.I * pl.d1_i + row, pending_.panel * s.d0_k + kk));
            ++moved_a_;
        }
        for (Count n = 0; n < pl.b_gB && pending_.b_done < b_elems; ++n, ++pending_.b_done) {
            const Count kk = pending_.b_done / pl.d1_j;
            const Count col = pending_.b_done % pl.d1_j;
            chip_.store_b(pending_.buffer, kk, col,
                          (*b_)(pending_.panel * s.d0_k + kk, pending_.J * pl.d1_j + col));
            ++moved_b_;
        }
    }

    void finish_read() {
        if (!numeric()) return;
        const auto& s = cfg_.shape;
        const auto& pl = cfg_.plan;
        if (pending_.a_done != pl.d1_i * s.d0_k || pending_.b_done != s.d0_k * pl.d1_j) {
            throw std::logic_error("panel read incomplete at the end of its round");
        }
        pending_.panel = -1;
    }

    // Numeric part of one compute iteration: tile `it` of the C block.
    void compute_step(Count it, int buffer) {
        if (!numeric()) return;
        const auto& s = cfg_.shape;
        const Count ti = it / cfg_.plan.r_A;
        const Count tj = it % cfg_.plan.r_A;
        for (Count ii = 0; ii < s.d0_i; ++ii)
            for (Count kk = 0; kk < s.d0_k; ++kk) a_tile_(ii, kk) = chip_.load_a(buffer, ti * s.d0_i + ii, kk);
        for (Count kk = 0; kk < s.d0_k; ++kk)
            for (Count jj = 0; jj < s.d0_j; ++jj) b_tile_(kk, jj) = chip_.load_b(buffer, kk, tj * s.d0_j + jj);
        for (Count ii = 0; ii < s.d0_i; ++ii)
            for (Count jj = 0; jj < s.d0_j; ++jj) c_tile_(ii, jj) = chip_.fifo_pop(ii, jj);
        grid_.mac(c_tile_, a_tile_, b_tile_);
        for (Count ii = 0; ii < s.d0_i; ++ii)
            for (Count jj = 0; jj < s.d0_j; ++jj) chip_.fifo_push(ii, jj, c_tile_(ii, jj));
    }

    // One lockstep round: iteration `it` reads slice `it` of the next panel
    // and computes tile `it` of the current one.
    void round(bool reading, bool computing, int compute_buffer) {
        if (!numeric()) return;
        for (Count it = 0; it < round_iterations(); ++it) {
            if (reading) read_step();
            if (computing) compute_step(it, compute_buffer);
        }
        if (reading) finish_read();
    }

    void run_block(Count I, Count J) {
        const auto& s = cfg_.shape;
        const auto& pl = cfg_.plan;
        const Count rr = round_iterations();
        ++stats_.blocks;

        // Phase 1: read panel 0, zero the C block.
        read_panel(I, J, 0, 0);
        chip_.fifo_fill_tiles(rr);
        if (numeric()) {
            for (Count t = 0; t < rr; ++t)
                for (Count ii = 0; ii < s.d0_i; ++ii)
                    for (Count jj = 0; jj < s.d0_j; ++jj) chip_.fifo_push(ii, jj, 0.0f);
        }
        round(true, false, 0);
        stats_.it_read_init += rr;

        // Phase 2: read panel k+1 while computing panel k.
        const Count n = panels();
        for (Count k = 0; k + 1 < n; ++k) {
            const int cur = static_cast<int>(k % 2);
            read_panel(I, J, k + 1, 1 - cur);
            round(true, true, cur);
            chip_.release(Stream::A, cur);
            chip_.release(Stream::B, cur);
            stats_.it_steady += rr;
        }

        // Phase 3: last panel.
        const int last = static_cast<int>((n - 1) % 2);
        round(false, true, last);
        chip_.release(Stream::A, last);
        chip_.release(Stream::B, last);
        stats_.it_tail += rr;

        // Phase 4: drain the FIFOs to C, d0_j floats per store.
        const Count block_elems = pl.d1_i * pl.d1_j;
        const Count unstalled = mem_.write(block_elems, s.d0_j);
        const Count write_iters = write_iterations(s, pl, cfg_.clock);
        mem_.add_stall_cycles(Stream::C, write_iters - unstalled);
        stats_.it_write += write_iters;
        chip_.fifo_drain_tiles(rr);
        if (numeric()) {
            for (Count t = 0; t < rr; ++t) {
                const Count ti = t / pl.r_A;
                const Count tj = t % pl.r_A;
                for (Count ii = 0; ii < s.d0_i; ++ii) {
                    for (Count jj = 0; jj < s.d0_j; ++jj) {
                        c_(I * pl.d1_i + ti * s.d0_i + ii, J * pl.d1_j + tj * s.d0_j + jj) =
                            chip_.fifo_pop(ii, jj);
                        ++moved_c_;
                    }
                }
            }
        }
    }

    struct PendingRead {
        Count I = 0, J = 0, panel = -1;
        int buffer = 0;
        Count a_done = 0, b_done = 0;
    };

    const BlockedConfig& cfg_;
    const Matrix* a_;
    const Matrix* b_;
    GlobalMemModel mem_;
    OnChipModel chip_;
    SystolicGrid grid_;
    SimStats stats_;
    Matrix c_, a_tile_, b_tile_, c_tile_;
    PendingRead pending_;
    Count moved_a_ = 0, moved_b_ = 0, moved_c_ = 0;
};

}  // namespace

BlockedResult run_blocked(const Matrix& a, const Matrix& b, const BlockedConfig& cfg) {
    check_config(cfg);
    const auto& p = cfg.problem;
    if (a.rows() != p.d2_i || a.cols() != p.d2_k || b.rows() != p.d2_k || b.cols() != p.d2_j) {
        throw Error(ErrorKind::DimensionMismatch, "operands do not match the problem shape");
    }
    if (a.layout() != Layout::ColMajor) {
        throw Error(ErrorKind::LayoutMismatch, "A must be stored column-major");
    }
    if (b.layout() != Layout::RowMajor) {
        throw Error(ErrorKind::LayoutMismatch, "B must be stored row-major");
    }
    BlockedSchedule sched(cfg, &a, &b);
    sched.run();
    return {sched.take_result(), sched.stats()};
}

BlockedResult run_blocked(const Matrix& a, const Matrix& b, const ArchShape& shape,
                          const BlockingPlan& plan, const ProblemShape& problem,
                          const MemorySpec& mem, const ClockSpec& clock) {
    return run_blocked(a, b, BlockedConfig{shape, plan, problem, mem, clock, LatencyProfile()});
}

SimStats run_blocked_counts(const BlockedConfig& cfg) {
    check_config(cfg);
    BlockedSchedule sched(cfg, nullptr, nullptr);
    sched.run();
    return sched.stats();
}

std::vector<std::string> traffic_audit(const SimStats& s, const ProblemShape& p,
                                       const BlockingPlan& plan) {
    std::vector<std::string> out;
    auto expect = [&](const char* what, Count got, Count want) {
        if (got != want) {
            out.push_back(std::string(what) + ": counted " + std::to_string(got) + ", expected " +
                          std::to_string(want));
        }
    };
    expect("elements_read_A", s.elements_read_A, p.d2_i * p.d2_k * (p.d2_j / plan.d1_j));
    expect("elements_read_B", s.elements_read_B, p.d2_k * p.d2_j * (p.d2_i / plan.d1_i));
    expect("elements_written_C", s.elements_written_C, p.d2_i * p.d2_j);
    return out;
}

}  // namespace sa3d
