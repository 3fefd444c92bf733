#include "catch_amalgamated.hpp"

#include "sa3d/core_model.hpp"

using namespace sa3d;

TEST_CASE("dsp and pe counts") {
    CHECK(dsp_count({28, 28, 6, 1}) == 4704);
    CHECK(dsp_count({72, 32, 2, 1}) == 4608);
    CHECK(dsp_count({1, 1, 1, 1}) == 1);

    CHECK(pe_count({28, 28, 6, 3}) == 1568);
    CHECK(pe_count({32, 16, 8, 8}) == 512);
    CHECK(pe_count({1, 1, 1, 1}) == 1);
    // every DSP belongs to exactly one PE
    for (Count dp : {1, 2, 4, 8}) {
        const ArchShape s{32, 16, 8, dp};
        CHECK(pe_count(s) * dp == dsp_count(s));
    }
}

TEST_CASE("shape validation") {
    CHECK_NOTHROW(validate(ArchShape{28, 28, 6, 3}));
    CHECK_THROWS_AS(validate(ArchShape{28, 28, 6, 4}), Error);
    CHECK_THROWS_AS(validate(ArchShape{0, 1, 1, 1}), Error);
    CHECK_THROWS_AS(validate(ArchShape{1, 1, 1, 0}), Error);
    try {
        validate(ArchShape{4, 4, 6, 4});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidShape);
    }
}

TEST_CASE("io throughput of the grid faces") {
    CHECK(io_throughput({72, 32, 2, 1}) == IoThroughput{144, 64});
    CHECK(io_throughput({64, 32, 2, 2}) == IoThroughput{128, 64});
    CHECK(io_throughput({1, 1, 1, 1}) == IoThroughput{1, 1});
}

TEST_CASE("ddr tier") {
    CHECK(ddr_floats_per_cycle({368}) == 8);
    CHECK(ddr_floats_per_cycle({250}) == 16);
    CHECK(ddr_floats_per_cycle({300}) == 16);
    CHECK(ddr_floats_per_cycle({300.5}) == 8);
    CHECK(ddr_floats_per_cycle({600}) == 8);
    CHECK_THROWS_AS(ddr_floats_per_cycle({150}), Error);
    CHECK_THROWS_AS(ddr_floats_per_cycle({601}), Error);
    try {
        ddr_floats_per_cycle({100});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnsupportedTier);
    }
}

TEST_CASE("default blocking plans") {
    const MemorySpec mem;
    auto g = make_blocking_plan({64, 32, 2, 2}, {398}, mem);
    CHECK(g.r_A == 16);
    CHECK(g.r_B == 8);
    CHECK(g.d1_i == 512);
    CHECK(g.d1_j == 512);
    CHECK(g.b_gA == 8);
    CHECK(g.b_gB == 8);
    CHECK_FALSE(g.overridden);

    auto e = make_blocking_plan({72, 32, 2, 1}, {368}, mem);
    CHECK(e.r_A == 18);
    CHECK(e.r_B == 8);
    CHECK(e.d1_i == 576);
    CHECK(e.d1_j == 576);

    // r_A * b_g always covers the face bandwidth
    for (Count i : {3, 7, 28, 70})
        for (Count j : {5, 16, 32}) {
            const ArchShape s{i, j, 2, 1};
            const auto p = make_blocking_plan(s, {368}, mem);
            const auto io = io_throughput(s);
            CHECK(p.r_A * p.b_gA >= io.b_a);
            CHECK(p.r_B * p.b_gB >= io.b_b);
            CHECK(p.d1_i == p.r_B * s.d0_i);
            CHECK(p.d1_j == p.r_A * s.d0_j);
        }
}

TEST_CASE("override blocking plans") {
    const MemorySpec mem;
    auto c = make_blocking_plan({28, 28, 6, 1}, {368}, mem, std::make_pair(Count{672}, Count{672}));
    CHECK(c.r_A == 24);
    CHECK(c.r_B == 24);
    CHECK(c.b_gA == 7);
    CHECK(c.b_gB == 7);
    CHECK(c.overridden);
    CHECK_FALSE(c.warnings.empty());  // width 7 is not a power of two

    MemorySpec relaxed;
    relaxed.lsu_pow2 = false;
    CHECK(make_blocking_plan({28, 28, 6, 1}, {368}, relaxed, std::make_pair(Count{672}, Count{672}))
              .warnings.empty());

    auto f = make_blocking_plan({70, 32, 2, 2}, {410}, mem, std::make_pair(Count{560}, Count{640}));
    CHECK(f.r_A == 20);
    CHECK(f.r_B == 8);
    CHECK(f.b_gA == 7);
    CHECK(f.b_gB == 8);

    // not a multiple of d0
    CHECK_THROWS_AS(make_blocking_plan({28, 28, 6, 1}, {368}, mem, std::make_pair(Count{670}, Count{672})),
                    Error);
    // too little reuse: b_g would exceed the tier
    try {
        make_blocking_plan({64, 32, 2, 2}, {398}, mem, std::make_pair(Count{64}, Count{32}));
        FAIL("expected InvalidPlan");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidPlan);
    }
}

TEST_CASE("problem validation") {
    const MemorySpec mem;
    const ArchShape c_shape{28, 28, 6, 1};
    const auto c_plan = make_blocking_plan(c_shape, {368}, mem, std::make_pair(Count{672}, Count{672}));
    CHECK(validate_problem({672, 672, 672}, c_plan, c_shape).empty());

    const ArchShape g{64, 32, 2, 2};
    const auto g_plan = make_blocking_plan(g, {398}, mem);
    const auto v = validate_problem({513, 512, 512}, g_plan, g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("d2_i") != std::string::npos);
    CHECK(validate_problem({512, 512, 510}, g_plan, g).empty());
    CHECK(validate_problem({512, 512, 511}, g_plan, g).size() == 1);
}

TEST_CASE("latency profile") {
    const LatencyProfile lat;
    CHECK(lat.l_mac() == 6);
    CHECK(lat.dot_latency(1) == 6);
    CHECK(lat.dot_latency(2) == 8);
    CHECK(lat.dot_latency(4) == 11);
    CHECK(lat.dot_latency(8) == 15);
    CHECK(lat.dot_latency(3) == 10);  // 8 + 3 * log2(1.5) = 9.75, rounded up
    CHECK(lat.dot_latency(6) == 14);
    CHECK(lat.dot_latency(16) >= lat.dot_latency(8));
    CHECK(LatencyProfile::register_hop() == 1);

    CHECK_THROWS_AS(LatencyProfile(6, {{1, 6}, {2, 5}}), Error);
    CHECK_THROWS_AS(LatencyProfile(-1, {{1, 6}}), Error);
    CHECK_THROWS_AS(LatencyProfile(6, {{1, 0}}), Error);
    const LatencyProfile flat(0, {{1, 3}});
    CHECK(flat.dot_latency(8) == 3);
}

TEST_CASE("helpers") {
    CHECK(ceil_div(7, 2) == 4);
    CHECK(ceil_div(8, 2) == 4);
    CHECK(is_pow2(8));
    CHECK_FALSE(is_pow2(7));
    CHECK_FALSE(is_pow2(0));
    CHECK(to_string(ArchShape{64, 32, 2, 2}) == "(64,32,2, d_p=2)");
}
