// Discrete-event timing of the 3D grid.
//
// Injection timetable (d_p values of A or B per bundle):
//   A bundle for row i, layer L, iteration q leaves its memory partition at
//   cycle i + q + L*l_dot and is latched into PE(i,0,L) one hop later.
//   B bundle for column j likewise with j in place of i.
// A PE starts a dot product once both bundles and the incoming partial sum
// (layer L-1, or the accumulator for L = 0) are present, and accepts at most
// one start per cycle. The result of the top layer leaves through one output
// register.
#include "sa3d/systolic_engine.hpp"

#include <algorithm>
#include <queue>
#include <vector>

namespace sa3d {
namespace {

enum class EventKind { ArriveA, ArriveB, ArrivePartial, DotDone, Exit };

struct Event {
    Count time;
    Count seq;
    EventKind kind;
    Count i, j, layer, iter;

    bool operator>(const Event& o) const {
        return time != o.time ? time > o.time : seq > o.seq;
    }
};

class GridEventSim {
public:
    GridEventSim(const ArchShape& shape, Count iterations, Count dot_latency)
        : s_(shape), iters_(iterations), l_dot_(dot_latency), layers_(shape.layers()) {
        const auto n = static_cast<std::size_t>(s_.d0_i * s_.d0_j * layers_ * iters_);
        have_a_.assign(n, false);
        have_b_.assign(n, false);
        have_partial_.assign(n, false);
        next_free_.assign(static_cast<std::size_t>(s_.d0_i * s_.d0_j * layers_), 0);
        first_start_.assign(static_cast<std::size_t>(s_.d0_i * s_.d0_j * layers_), -1);
    }

    TimingReport run() {
        for (Count q = 0; q < iters_; ++q) {
            for (Count L = 0; L < layers_; ++L) {
                for (Count i = 0; i < s_.d0_i; ++i) {
                    push(i + q + L * l_dot_ + LatencyProfile::register_hop(), EventKind::ArriveA,
                         i, 0, L, q);
                }
                for (Count j = 0; j < s_.d0_j; ++j) {
                    push(j + q + L * l_dot_ + LatencyProfile::register_hop(), EventKind::ArriveB,
                         0, j, L, q);
                }
            }
            for (Count i = 0; i < s_.d0_i; ++i)
                for (Count j = 0; j < s_.d0_j; ++j) have_partial_[slot(i, j, 0, q)] = true;
        }

        Count events = 0;
        while (!queue_.empty()) {
            const Event e = queue_.top();
            queue_.pop();
            ++events;
            handle(e);
        }

        TimingReport r;
        r.iterations = iters_;
        r.l_tot = last_exit_;
        // The first iteration leaves l_body cycles after its launch slot.
        r.l_body = first_exit_ - 1;
        r.fill = first_start_[pe(s_.d0_i - 1, s_.d0_j - 1, 0)] - first_start_[pe(0, 0, 0)];
        r.events = events;
        return r;
    }

private:
    std::size_t pe(Count i, Count j, Count L) const {
        return static_cast<std::size_t>((i * s_.d0_j + j) * layers_ + L);
    }
    std::size_t slot(Count i, Count j, Count L, Count q) const {
        return pe(i, j, L) * static_cast<std::size_t>(iters_) + static_cast<std::size_t>(q);
    }

    void push(Count time, EventKind kind, Count i, Count j, Count L, Count q) {
        queue_.push({time, seq_++, kind, i, j, L, q});
    }

    void try_start(Count now, Count i, Count j, Count L, Count q) {
        const auto k = slot(i, j, L, q);
        if (!(have_a_[k] && have_b_[k] && have_partial_[k])) return;
        auto& free_at = next_free_[pe(i, j, L)];
        const Count start = std::max(now, free_at);
        free_at = start + 1;
        auto& first = first_start_[pe(i, j, L)];
        if (first < 0) first = start;
        push(start + l_dot_, EventKind::DotDone, i, j, L, q);
    }

    void handle(const Event& e) {
        const Count hop = LatencyProfile::register_hop();
        switch (e.kind) {
            case EventKind::ArriveA:
                have_a_[slot(e.i, e.j, e.layer, e.iter)] = true;
                if (e.j + 1 < s_.d0_j) push(e.time + hop, EventKind::ArriveA, e.i, e.j + 1, e.layer, e.iter);
                try_start(e.time, e.i, e.j, e.layer, e.iter);
                break;
            case EventKind::ArriveB:
                have_b_[slot(e.i, e.j, e.layer, e.iter)] = true;
                if (e.i + 1 < s_.d0_i) push(e.time + hop, EventKind::ArriveB, e.i + 1, e.j, e.layer, e.iter);
                try_start(e.time, e.i, e.j, e.layer, e.iter);
                break;
            case EventKind::ArrivePartial:
                have_partial_[slot(e.i, e.j, e.layer, e.iter)] = true;
                try_start(e.time, e.i, e.j, e.layer, e.iter);
                break;
            case EventKind::DotDone:
                if (e.layer + 1 < layers_) {
                    push(e.time, EventKind::ArrivePartial, e.i, e.j, e.layer + 1, e.iter);
                } else {
                    push(e.time + hop, EventKind::Exit, e.i, e.j, e.layer, e.iter);
                }
                break;
            case EventKind::Exit:
                last_exit_ = std::max(last_exit_, e.time);
                if (e.iter == 0) first_exit_ = std::max(first_exit_, e.time);
                break;
        }
    }

    ArchShape s_;
    Count iters_;
    Count l_dot_;
    Count layers_;
    Count seq_ = 0;
    Count last_exit_ = 0;
    Count first_exit_ = 0;
    std::vector<bool> have_a_, have_b_, have_partial_;
    std::vector<Count> next_free_;
    std::vector<Count> first_start_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
};

}  // namespace

TimingReport event_sim_timing(const ArchShape& shape, Count K, const LatencyProfile& lat) {
    validate(shape);
    if (K < 1 || K % shape.d0_k != 0) {
        throw Error(ErrorKind::IndivisiblePartition,
                    "K = " + std::to_string(K) + " must be a positive multiple of d0_k");
    }
    return GridEventSim(shape, K / shape.d0_k, lat.dot_latency(shape.d_p)).run();
}

TimingReport event_sim_timing_classical(Count d0_i, Count d0_j, Count K, const LatencyProfile& lat) {
    if (d0_i < 1 || d0_j < 1 || K < 1) {
        throw Error(ErrorKind::InvalidShape, "classical grid sizes and K must be >= 1");
    }
    return GridEventSim({d0_i, d0_j, 1, 1}, K, lat.l_mac()).run();
}

}  // namespace sa3d
