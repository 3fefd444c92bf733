#include "sa3d/systolic_engine.hpp"

#include <ostream>
#include <sstream>

namespace sa3d {

GridState::GridState(const ArchShape& shape) : shape_(shape) {
    validate(shape_);
    const auto n = static_cast<std::size_t>(shape_.d0_i * shape_.d0_j);
    a_prop_.assign(n, 0.0f);
    b_prop_.assign(n, 0.0f);
    c_acc_.assign(n, 0.0f);
    a_tag_.assign(n, -1);
    b_tag_.assign(n, -1);
    forwards_.assign(n, 0);
}

SystolicGrid::SystolicGrid(const ArchShape& shape) : state_(shape) {}

Count SystolicGrid::wavefront_steps() const {
    const auto& s = shape();
    return s.d0_i + s.d0_j + s.d0_k - 2;
}

namespace {

void check_block_dims(const Matrix& c, const Matrix& a0, const Matrix& b0, const ArchShape& s) {
    if (c.rows() != s.d0_i || c.cols() != s.d0_j || a0.rows() != s.d0_i ||
        a0.cols() != s.d0_k || b0.rows() != s.d0_k || b0.cols() != s.d0_j) {
        std::ostringstream os;
        os << "block MAC on " << to_string(s) << " got C " << c.rows() << "x" << c.cols()
           << ", A0 " << a0.rows() << "x" << a0.cols() << ", B0 " << b0.rows() << "x"
           << b0.cols();
        throw Error(ErrorKind::DimensionMismatch, os.str());
    }
}

}  // namespace

void SystolicGrid::mac(Matrix& c, const Matrix& a0, const Matrix& b0, WavefrontTrace* trace) {
    const ArchShape& s = shape();
    check_block_dims(c, a0, b0, s);

    for (Count i = 0; i < s.d0_i; ++i)
        for (Count j = 0; j < s.d0_j; ++j) state_.c(i, j) = c(i, j);

    const Count steps = wavefront_steps();
    for (Count k = 0; k < steps; ++k) {
        for (Count i = s.d0_i - 1; i >= 0; --i) {
            for (Count j = s.d0_j - 1; j >= 0; --j) {
                if (!(i + j <= k && k < i + j + s.d0_k)) continue;

                if (j) {
                    state_.a(i, j) = state_.a(i, j - 1);
                    state_.a_tag(i, j) = state_.a_tag(i, j - 1);
                } else {
                    state_.a(i, j) = a0(i, k - i);
                    state_.a_tag(i, j) = k;
                }
                if (i) {
                    state_.b(i, j) = state_.b(i - 1, j);
                    state_.b_tag(i, j) = state_.b_tag(i - 1, j);
                } else {
                    state_.b(i, j) = b0(k - j, j);
                    state_.b_tag(i, j) = k;
                }

                const float prod = state_.a(i, j) * state_.b(i, j);
                state_.c(i, j) += prod;
                ++macs_;

                // The partial sum leaves the dot unit after its last lane.
                // Arithmetic order is unchanged, only the carrier moves.
                const Count kk = k - i - j;
                const bool forwards = kk % s.d_p == s.d_p - 1;
                if (forwards) ++state_.forwards(i, j);

                if (trace) {
                    trace->activations.push_back({k, i, j, kk, kk / s.d_p, state_.a_tag(i, j),
                                                  state_.b_tag(i, j), forwards});
                }
            }
        }
    }
    if (trace) trace->steps += steps;

    for (Count i = 0; i < s.d0_i; ++i)
        for (Count j = 0; j < s.d0_j; ++j) c(i, j) = state_.c(i, j);
}

Matrix systolic_block_mac(const Matrix& c, const Matrix& a0, const Matrix& b0,
                          const ArchShape& shape, WavefrontTrace* trace) {
    SystolicGrid grid(shape);
    Matrix out = c;
    grid.mac(out, a0, b0, trace);
    return out;
}

Matrix systolic_matmul(const Matrix& a, const Matrix& b, const ArchShape& s) {
    validate(s);
    if (a.rows() != s.d0_i || b.cols() != s.d0_j || a.cols() != b.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "systolic_matmul operands do not match the grid");
    }
    const Count K = a.cols();
    if (K % s.d0_k != 0) {
        throw Error(ErrorKind::IndivisiblePartition,
                    "K = " + std::to_string(K) + " is not a multiple of d0_k");
    }
    SystolicGrid grid(s);
    Matrix c(s.d0_i, s.d0_j);
    const auto a_blocks = block_view(a, s.d0_i, s.d0_k);
    const auto b_blocks = block_view(b, s.d0_k, s.d0_j);
    for (Count t = 0; t < K / s.d0_k; ++t) {
        grid.mac(c, a_blocks.block(0, t), b_blocks.block(t, 0));
    }
    return c;
}

void write_trace_csv(const WavefrontTrace& trace, const ArchShape& s, std::ostream& os) {
    if (s.d0_i > 8 || s.d0_j > 8 || s.d0_k > 8) {
        throw Error(ErrorKind::InvalidArgument, "trace dumps are limited to grids of at most 8^3");
    }
    os << "step,i,j,kk,layer,a_injected_at,b_injected_at,forwards\n";
    for (const auto& a : trace.activations) {
        os << a.step << ',' << a.i << ',' << a.j << ',' << a.kk << ',' << a.layer << ','
           << a.a_injected_at << ',' << a.b_injected_at << ',' << (a.forwards ? 1 : 0) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Closed-form timing
// ---------------------------------------------------------------------------

TimingReport timing_classical(Count d0_i, Count d0_j, Count K, const LatencyProfile& lat) {
    if (d0_i < 1 || d0_j < 1 || K < 1) {
        throw Error(ErrorKind::InvalidShape, "classical grid sizes and K must be >= 1");
    }
    TimingReport r;
    r.iterations = K;
    r.l_body = d0_i + d0_j - 1 + lat.l_mac();
    r.l_tot = d0_i + d0_j + K - 1 + lat.l_mac();
    r.fill = d0_i + d0_j - 2;
    return r;
}

TimingReport timing_3d(const ArchShape& s, Count K, const LatencyProfile& lat) {
    validate(s);
    if (K < 1 || K % s.d0_k != 0) {
        throw Error(ErrorKind::IndivisiblePartition,
                    "K = " + std::to_string(K) + " must be a positive multiple of d0_k");
    }
    const Count layer_latency = s.layers() * lat.dot_latency(s.d_p);
    TimingReport r;
    r.iterations = K / s.d0_k;
    r.l_body = s.d0_i + s.d0_j - 1 + layer_latency;
    r.l_tot = s.d0_i + s.d0_j + K / s.d0_k - 1 + layer_latency;
    r.fill = s.d0_i + s.d0_j - 2;
    return r;
}

}  // namespace sa3d
