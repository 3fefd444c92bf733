#include "catch_amalgamated.hpp"

#include <cmath>

#include "sa3d/blocked_runner.hpp"
#include "sa3d/perf_analyzer.hpp"
#include "sa3d/systolic_engine.hpp"

using namespace sa3d;

TEST_CASE("peak throughput") {
    CHECK(to_gflops(t_peak(4704, {368})) == Catch::Approx(3462).margin(1.0));
    CHECK(to_gflops(t_peak(4480, {410})) == Catch::Approx(3673).margin(1.0));
    CHECK(to_gflops(t_peak(1, {500})) == 1.0);
    CHECK_THROWS_AS(t_peak(0, {500}), Error);
}

TEST_CASE("stall rate") {
    const MemorySpec mem;
    CHECK(stall_rate(64, {400}, mem) == 0.25);
    CHECK(stall_rate(32, {300}, mem) == 0.0);
    CHECK(stall_rate(64, {300}, mem) == 0.0);  // exactly 19200 MB/s
    MemorySpec half;
    half.efficiency = 0.5;
    CHECK(stall_rate(32, {600}, half) == 0.5);
    CHECK(controller_bytes_per_cycle(mem, {400}) == 48.0);
    CHECK(effective_throughput(100.0, 0.25) == 75.0);
    CHECK_THROWS_AS(stall_rate(0, {400}, mem), Error);
    MemorySpec broken;
    broken.efficiency = 1.5;
    CHECK_THROWS_AS(stall_rate(32, {400}, broken), Error);
}

TEST_CASE("unit throughput models") {
    CHECK(dot_unit_model(8).t_flop == 16);
    CHECK(dot_unit_model(8).b_in == 17);
    CHECK(dot_unit_model(1).t_flop == 2);
    CHECK(dot_unit_model(1).b_in == 3);
    CHECK(dot_unit_model(4).t_flop == 8);
    CHECK(dot_unit_model(4).b_in == 9);

    const auto c = classical_array_model(4, 4);
    CHECK(c.t_flop == 32);
    CHECK(c.b_a == 4);
    CHECK(c.b_b == 4);
    const auto one = classical_array_model(1, 1);
    CHECK(one.t_flop == 2);

    // the 3D grid with one layer of size-1 dot units has the classical I/O
    const auto io = io_throughput({4, 4, 1, 1});
    CHECK(io.b_a == c.b_a);
    CHECK(io.b_b == c.b_b);
    CHECK(2 * dsp_count({4, 4, 1, 1}) == c.t_flop);
}

TEST_CASE("compute fraction") {
    const MemorySpec mem;
    const ArchShape g{64, 32, 2, 2};
    const auto gp = make_blocking_plan(g, {398}, mem);
    CHECK(c_percent(g, gp, {2048, 2048, 2048}, {398}) == Catch::Approx(1024.0 / 1281.0).epsilon(1e-12));

    const ArchShape h{32, 32, 4, 4};
    const auto hp = make_blocking_plan(h, {408}, mem);
    CHECK(c_percent(h, hp, {16384, 16384, 16384}, {408}) == Catch::Approx(4096.0 / 4225.0).epsilon(1e-12));

    const ArchShape e{72, 32, 2, 1};
    const auto ep = make_blocking_plan(e, {368}, mem);
    CHECK(c_percent(e, ep, {18432, 18432, 18432}, {368}) == Catch::Approx(9216.0 / 9505.0).epsilon(1e-12));

    // one panel on a tiny grid: one compute round against one read round
    const ArchShape t{1, 1, 2, 2};
    CHECK(c_percent(t, make_blocking_plan(t, {368}, mem), {8, 8, 2}, {368}) ==
          Catch::Approx(0.5).margin(0.03));
}

TEST_CASE("flop count and efficiency") {
    CHECK(flop_count({512, 512, 512}) == 268'173'312);
    CHECK(flop_count({7, 9, 1}) == 63);
    CHECK(flop_count({672, 672, 672}) == 672LL * 672 * 1343);
    CHECK(flop_count({672, 672, 672}) == 606'477'312);

    // measured tables print two decimals
    CHECK(std::round(efficiency(3083, 3462) * 100) == 89);
    CHECK(efficiency(3083, 3462) == Catch::Approx(0.8905).margin(1e-4));
    CHECK(efficiency(3301, 3391) == Catch::Approx(0.973).margin(5e-4));
    CHECK(efficiency(2000, 2000) == 1.0);
    CHECK_THROWS_AS(efficiency(1, 0), Error);
}

TEST_CASE("estimate record") {
    const MemorySpec mem;
    const ArchShape g{64, 32, 2, 2};
    const ClockSpec clock{398};
    const auto plan = make_blocking_plan(g, clock, mem);
    const ProblemShape p{512, 512, 512};
    const auto e = estimate(g, plan, p, clock, mem);
    CHECK(e.n_dsp == 4096);
    CHECK(e.n_pe == 2048);
    CHECK(e.b_a == 128);
    CHECK(e.b_b == 64);
    CHECK(e.c_percent == Catch::Approx(256.0 / 513.0).epsilon(1e-12));
    CHECK(e.t_pred == Catch::Approx(e.c_percent * e.t_peak));
    CHECK(e.stall == 0.0);  // 32 B/cycle at 398 MHz fits in 19200 MB/s
    CHECK(e.flops == 268'173'312);
    CHECK(e.l_tot == timing_3d(g, 512, LatencyProfile()).l_tot);

    // the iteration model of the estimate and the schedule agree here
    const auto sim = run_blocked_counts({g, plan, p, mem, clock, LatencyProfile()});
    CHECK(e.predicted_cycles == Catch::Approx(static_cast<double>(sim.cycles_total)).margin(1.0));
}
