#include "catch_amalgamated.hpp"

#include <algorithm>
#include <filesystem>

#include "sa3d/report.hpp"

using namespace sa3d;

namespace {

const std::string kRefs = std::string(SA3D_DATA_DIR) + "/reference_tables.json";

EnumerationSpec spec_for(Count budget, Range i, Range j, Range k, Range dp) {
    EnumerationSpec s;
    s.budget = budget;
    s.d0_i = i;
    s.d0_j = j;
    s.d0_k = k;
    s.d_p = dp;
    return s;
}

const EfficiencyRow& row_for(const CompareReport& r, const std::string& id, Count d2_i) {
    auto it = std::find_if(r.efficiency.begin(), r.efficiency.end(),
                           [&](const EfficiencyRow& e) { return e.id == id && e.problem.d2_i == d2_i; });
    REQUIRE(it != r.efficiency.end());
    return *it;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config(R"({"arch": {"d0_i": 8, "d0_j": 4, "d0_k": 4}})");
    CHECK(cfg.shape == ArchShape{8, 4, 4, 4});  // d_p defaults to d0_k
    CHECK(cfg.clock.fmax_mhz == 368.0);
    CHECK_FALSE(cfg.problem);
    CHECK_FALSE(cfg.d1_override);

    const auto full = parse_config(R"({
        "arch": {"d0_i": 28, "d0_j": 28, "d0_k": 6, "d_p": 1},
        "clock": {"fmax_mhz": 368},
        "memory": {"bank_mb_s": 19200, "efficiency": 0.9},
        "blocking": {"d1_i": 672, "d1_j": 672},
        "problem": {"d2_i": 672, "d2_j": 672, "d2_k": 672},
        "latency": {"l_mac": 5, "l_dot": {"1": 5, "2": 7}},
        "constraints": {"dsp_budget": 4713}
    })");
    CHECK(full.mem.efficiency == 0.9);
    CHECK(full.d1_override == std::make_pair(Count{672}, Count{672}));
    CHECK(full.lat.dot_latency(2) == 7);
    CHECK(full.constraints.dsp_budget == 4713);

    CHECK_THROWS_AS(parse_config(R"({"arch": {"d0_i": 8, "d0_j": 4, "d0_k": 4, "extra": 1}})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"arch": {"d0_i": 8, "d0_j": 4}})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"arch": {"d0_i": 8.5, "d0_j": 4, "d0_k": 4}})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"clock": {"fmax_mhz": 400}})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"arch": {"d0_i": 8, "d0_j": 4, "d0_k": 4}, "blocking": {"d1_i": 8}})"), Error);
    CHECK_THROWS_AS(parse_config("{not json"), Error);
    CHECK_THROWS_AS(load_config("/nonexistent/sa3d.json"), Error);
}

TEST_CASE("design points round-trip through the config format") {
    DesignConfig cfg;
    cfg.shape = {70, 32, 2, 2};
    cfg.clock = {410};
    cfg.d1_override = std::make_pair(Count{560}, Count{640});
    cfg.lat = LatencyProfile(4, {{1, 4}, {2, 6}});
    cfg.constraints.dsp_budget = 4713;
    cfg.mem.efficiency = 0.75;
    const auto point = make_design_point(cfg);
    REQUIRE(point.feasible);

    const auto text = to_config_text(to_config(point, ProblemShape{560, 640, 560}));
    const auto back = parse_config(text);
    CHECK(make_design_point(back) == point);
    CHECK(back.problem == ProblemShape{560, 640, 560});

    const auto path = std::filesystem::temp_directory_path() / "sa3d_roundtrip.json";
    save_config(back, path);
    CHECK(load_config(path) == back);
    std::filesystem::remove(path);

    // default plans stay default after the round trip
    DesignConfig plain;
    plain.shape = {64, 32, 2, 2};
    const auto p2 = make_design_point(plain);
    CHECK(make_design_point(parse_config(to_config_text(to_config(p2)))) == p2);
}

TEST_CASE("infeasible design points carry reasons") {
    DesignConfig cfg;
    cfg.shape = {64, 32, 2, 2};
    cfg.d1_override = std::make_pair(Count{64}, Count{32});
    cfg.constraints.dsp_budget = 100;
    const auto p = make_design_point(cfg);
    CHECK_FALSE(p.feasible);
    CHECK(p.violations.size() == 2);
    CHECK_THROWS_AS(predict(p, {512, 512, 512}), Error);
    CHECK_THROWS_AS(simulate(p, {64, 32, 2}, Fidelity::Counts, 1), Error);
}

TEST_CASE("ranges") {
    const auto r = parse_range("2:10:4");
    CHECK(r.lo == 2);
    CHECK(r.hi == 10);
    CHECK(r.step == 4);
    CHECK(parse_range("7").hi == 7);
    CHECK(parse_range("1:3").step == 1);
    CHECK_THROWS_AS(parse_range("a:3"), Error);
    CHECK_THROWS_AS(parse_range("1:2:3:4"), Error);
    CHECK_THROWS_AS(enumerate(spec_for(10, {3, 2, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1})), Error);
    CHECK_THROWS_AS(enumerate(spec_for(0, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1})), Error);
}

TEST_CASE("enumeration") {
    SECTION("budget 1") {
        const auto pts = enumerate(spec_for(1, {1, 4, 1}, {1, 4, 1}, {1, 4, 1}, {1, 4, 1}));
        REQUIRE(pts.size() == 1);
        CHECK(pts[0].shape == ArchShape{1, 1, 1, 1});
        CHECK(pts[0].feasible);
    }
    SECTION("the available DSPs of the board") {
        const auto s = spec_for(4713, {28, 72, 1}, {28, 32, 1}, {1, 8, 1}, {1, 8, 1});
        const auto pts = enumerate(s);
        const auto has = [&](ArchShape a) {
            return std::any_of(pts.begin(), pts.end(), [&](const DesignPoint& p) { return p.shape == a; });
        };
        CHECK(has({28, 28, 6, 1}));
        CHECK(has({72, 32, 2, 1}));
        CHECK_FALSE(has({72, 32, 3, 1}));
        CHECK_FALSE(has({72, 32, 3, 3}));
        for (const auto& p : pts) {
            CHECK(dsp_count(p.shape) <= 4713);
            CHECK(p.shape.d0_k % p.shape.d_p == 0);
        }
        // lexicographic order
        for (std::size_t n = 1; n < pts.size(); ++n) {
            const auto& a = pts[n - 1].shape;
            const auto& b = pts[n].shape;
            CHECK(std::tie(a.d0_i, a.d0_j, a.d0_k, a.d_p) < std::tie(b.d0_i, b.d0_j, b.d0_k, b.d_p));
        }
        // identical input, identical report
        const ProblemShape problem{4096, 4096, 4096};
        const auto r1 = dse_report(pts, predict_all(pts, problem, 1), problem, Format::Csv);
        const auto r2 = dse_report(enumerate(s), predict_all(enumerate(s), problem, 8), problem, Format::Csv);
        CHECK(r1 == r2);
        CHECK(dse_report(pts, predict_all(pts, problem, 3), problem, Format::Table) ==
              dse_report(pts, predict_all(pts, problem, 1), problem, Format::Table));
    }
    SECTION("dot-unit limit") {
        auto s = spec_for(64, {4, 4, 1}, {4, 4, 1}, {4, 4, 1}, {1, 4, 1});
        s.max_dp = 2;
        const auto pts = enumerate(s);
        REQUIRE(pts.size() == 3);  // d_p = 1, 2, 4
        CHECK(pts[0].feasible);
        CHECK(pts[1].feasible);
        CHECK_FALSE(pts[2].feasible);
        const auto est = predict_all(pts, {64, 64, 64}, 2);
        CHECK(est[0].has_value());
        CHECK_FALSE(est[2].has_value());
    }
}

TEST_CASE("simulation fidelities") {
    DesignConfig cfg;
    cfg.shape = {4, 8, 2, 1};
    cfg.clock = {400};
    cfg.d1_override = std::make_pair(Count{16}, Count{32});
    const auto p = make_design_point(cfg);
    const ProblemShape problem{32, 64, 48};

    const auto blocked = simulate(p, problem, Fidelity::Blocked, 4);
    const auto functional = simulate(p, problem, Fidelity::Functional, 4);
    const auto counts = simulate(p, problem, Fidelity::Counts, 4);
    CHECK(blocked.bitwise_match);
    CHECK(functional.bitwise_match);
    CHECK(blocked.result_hash == functional.result_hash);
    CHECK(blocked.audit.empty());
    CHECK(counts.stats == blocked.stats);
    CHECK_FALSE(counts.checked);
    CHECK(functional.stats.it_comp == blocked.stats.it_comp);

    const auto other_seed = simulate(p, problem, Fidelity::Blocked, 5);
    CHECK(other_seed.result_hash != blocked.result_hash);

    const auto uniform = simulate(p, problem, Fidelity::Functional, 4, Fill::Uniform);
    CHECK(uniform.max_rel_error <= 1e-5);

    CHECK(parse_fidelity("counts") == Fidelity::Counts);
    CHECK_THROWS_AS(parse_fidelity("cycle"), Error);
}

TEST_CASE("bundled reference data") {
    const auto refs = load_references(kRefs);
    CHECK(refs.version >= 1);
    REQUIRE(refs.designs.size() == 12);
    const auto* c = refs.find("C");
    REQUIRE(c);
    CHECK(c->shape == ArchShape{28, 28, 6, 1});
    CHECK(c->n_dsp == 4704);
    CHECK(c->exclude_efficiency);
    CHECK(c->measurements.size() == 6);
    CHECK(refs.find("A")->fitter_failed);
    CHECK_FALSE(refs.find("A")->fmax_mhz.has_value());
    CHECK(refs.find("F")->d1 == std::make_pair(Count{560}, Count{640}));
    CHECK(refs.find("Z") == nullptr);
    CHECK_THROWS_AS(parse_references(R"({"designs": []})"), Error);
    CHECK_THROWS_AS(load_references("/nonexistent/refs.json"), Error);
}

TEST_CASE("comparison rows") {
    const auto refs = load_references(kRefs);
    const ComparePolicy policy;
    const auto report = compare(predictions_for(refs, policy), refs, policy);

    CHECK(report.resources.size() == 12);
    for (const auto& r : report.resources) CHECK(r.status == RowStatus::Pass);

    const auto& e = row_for(report, "E", 18432);
    CHECK(e.predicted_c == Catch::Approx(9216.0 / 9505.0).epsilon(1e-12));
    CHECK(e.status == RowStatus::Pass);

    const auto& c = row_for(report, "C", 21504);
    CHECK(c.predicted_c == Catch::Approx(0.973).margin(5e-4));
    CHECK(c.status == RowStatus::Excluded);

    // column G
    CHECK(*row_for(report, "G", 512).delta <= 0.05);
    CHECK(*row_for(report, "G", 512).delta == Catch::Approx(0.499 - 0.45).margin(1e-3));
    CHECK(*row_for(report, "G", 1024).delta == Catch::Approx(0.0158).margin(1e-4));
    for (Count d2 : {2048, 4096, 8192, 16384}) CHECK(*row_for(report, "G", d2).delta <= 0.01);

    // a prediction without a reference row
    Prediction lone = predictions_for(refs, policy).front();
    lone.design_id = "Z";
    const auto r2 = compare({lone}, refs, policy);
    CHECK(r2.efficiency[0].status == RowStatus::NoReference);
    CHECK_FALSE(r2.efficiency[0].delta.has_value());

    // simulated column from the count-only schedule
    ComparePolicy with_sim = policy;
    with_sim.simulate = true;
    ReferenceSet just_g;
    just_g.version = refs.version;
    just_g.designs = {*refs.find("G")};
    just_g.designs[0].measurements.resize(3);
    const auto preds = predictions_for(just_g, with_sim);
    REQUIRE(preds.size() == 3);
    for (const auto& p : preds) {
        REQUIRE(p.simulated_c.has_value());
        CHECK(std::abs(*p.simulated_c - p.c_percent) <= 0.01);
    }
}

TEST_CASE("reports") {
    TextTable t({"name", "value"});
    t.add({"alpha", "1.5"});
    t.add({"b", "12.25"});
    CHECK(t.render(Format::Table) == "name   value\n------------\nalpha    1.5\nb      12.25\n");
    CHECK(t.render(Format::Csv) == "name,value\nalpha,1.5\nb,12.25\n");
    TextTable q({"x"});
    q.add({"a,b"});
    CHECK(q.render(Format::Csv) == "x\n\"a,b\"\n");
    CHECK(parse_format("csv") == Format::Csv);
    CHECK_THROWS_AS(parse_format("xml"), Error);

    DesignConfig cfg;
    cfg.shape = {28, 28, 6, 1};
    cfg.d1_override = std::make_pair(Count{672}, Count{672});
    const auto p = make_design_point(cfg);
    const ProblemShape problem{672, 672, 672};
    const auto text = estimate_report(p, problem, predict(p, problem), Format::Table);
    CHECK(text.find("(assumed)") != std::string::npos);
    CHECK(text.find("plan_warnings") != std::string::npos);  // LSU width 7
    CHECK(text.find("c_percent             0.5308") != std::string::npos);
    const auto csv = estimate_report(p, problem, predict(p, problem), Format::Csv);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}
