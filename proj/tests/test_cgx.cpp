#include <cmath>

#include "doctest.h"

#include "dldn/cgx.hpp"
#include "dldn/instance_io.hpp"
#include "dldn/ospf.hpp"
#include "dldn/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dldn;
using namespace dldn::testing;

namespace {

std::vector<FlowSpec> with_catalogs(const NetworkInstance& inst, std::vector<FlowSpec> flows) {
    attach_pattern_catalogs(inst, flows);
    return flows;
}

} // namespace

TEST_CASE("build_master: row layout and empty master") {
    NetworkInstance inst =
        make_instance(3, {{0, 1, 10.0, 50000}, {1, 2, 10.0, 50000}}, 10.0, 20.0, 0.0);
    std::vector<FlowSpec> flows =
        with_catalogs(inst, {make_flow("f0", "a0", "a2", 1'000'000'000, 1500, 1000.0)});

    LinearProgram empty = build_master(inst, flows, {});
    CHECK(empty.num_rows() == 1 + 2 + 3);
    CHECK(empty.num_cols() == 0);
    LpSolution sol = solve_lp(empty);
    CHECK(sol.objective == 0.0);

    auto pp = path_feasibility(inst, flows[0], 0, {0, 1});
    REQUIRE(pp.has_value());
    LinearProgram one = build_master(inst, flows, {{0, *pp}});
    REQUIRE(one.num_cols() == 1);
    CHECK(one.columns[0].entries.size() == 1 + 2 + 3);  // routing + arcs + nodes on path
    CHECK(one.columns[0].objective == doctest::Approx(1e9));

    // duplicates are dropped
    LinearProgram dup = build_master(inst, flows, {{0, *pp}, {0, *pp}});
    CHECK(dup.num_cols() == 1);
}

TEST_CASE("build_master row count matches |F|+|A|+|V| at survey scale") {
    NetworkInstance inst;
    inst.cycle = {10'000, 8, 3};
    for (int i = 0; i < 505; ++i) {
        inst.nodes.push_back({"n" + std::to_string(i), 20'000, 0, 1'250'000});
    }
    for (int i = 0; i < 1061; ++i) {
        inst.arcs.push_back({inst.nodes[i % 505].id, inst.nodes[(i * 7 + 1) % 505].id, 1000,
                             125'000});
    }
    inst.rebuild_indices();
    std::vector<FlowSpec> flows;
    for (int i = 0; i < 100; ++i) {
        flows.push_back(make_flow("f" + std::to_string(i), "n0", "n1", 1'000'000'000, 1500, 1000.0));
    }
    LinearProgram lp = build_master(inst, flows, {});
    CHECK(lp.num_rows() == 1666);
}

TEST_CASE("csp_shortest_path: budget-inactive, diamond, and infeasible cases") {
    // diamond: a0 -> a1 -> a3 cheap but slow, a0 -> a2 -> a3 expensive but fast
    NetworkInstance inst = make_instance(
        4, {{0, 1, 1.0, 1000}, {1, 3, 1.0, 1000}, {0, 2, 1.0, 1000}, {2, 3, 1.0, 1000}}, 10.0,
        20.0, 0.0);
    std::vector<double> cost = {1.0, 1.0, 5.0, 5.0};
    std::vector<Nanoseconds> delay = {us_to_ns(50), us_to_ns(50), us_to_ns(10), us_to_ns(10)};

    auto loose = csp_shortest_path(inst, cost, delay, us_to_ns(1000), "a0", "a3");
    REQUIRE(loose.has_value());
    CHECK(loose->cost == doctest::Approx(2.0));  // cheap path wins with budget inactive
    CHECK(loose->arcs == std::vector<int>{0, 1});

    auto tight = csp_shortest_path(inst, cost, delay, us_to_ns(40), "a0", "a3");
    REQUIRE(tight.has_value());
    CHECK(tight->cost == doctest::Approx(10.0));  // forced onto the fast path
    CHECK(tight->arcs == std::vector<int>{2, 3});

    CHECK_FALSE(csp_shortest_path(inst, cost, delay, us_to_ns(5), "a0", "a3").has_value());
    CHECK_THROWS_AS(csp_shortest_path(inst, cost, {1, 1, 1, 0}, 100, "a0", "a3"),
                    std::invalid_argument);
}

TEST_CASE("csp_shortest_path agrees with exhaustive enumeration") {
    Rng rng(51);
    int feasible_cases = 0;
    for (int t = 0; t < 1000; ++t) {
        NetworkInstance inst = random_instance(rng, 8);
        std::vector<double> cost(inst.arcs.size());
        std::vector<Nanoseconds> delay(inst.arcs.size());
        for (size_t a = 0; a < inst.arcs.size(); ++a) {
            cost[a] = rng.uniform(0, 100) / 10.0;
            delay[a] = rng.uniform(1, 50'000);
        }
        Nanoseconds budget = rng.uniform(10'000, 150'000);
        const NodeId& src = inst.nodes.front().id;
        const NodeId& dst = inst.nodes.back().id;
        auto got = csp_shortest_path(inst, cost, delay, budget, src, dst);
        auto want = csp_brute_force(inst, cost, delay, budget, src, dst);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(std::abs(got->cost - want->first) <= 1e-9);
            CHECK(got->delay_ns <= budget);
            // returned path must be simple and its sums must match the label
            std::vector<char> seen(inst.nodes.size(), 0);
            double c = 0;
            Nanoseconds d = 0;
            for (int a : got->arcs) {
                c += cost[a];
                d += delay[a];
                CHECK_FALSE(seen[inst.node_index.at(inst.arcs[a].head)]);
                seen[inst.node_index.at(inst.arcs[a].head)] = 1;
            }
            CHECK(c == doctest::Approx(got->cost));
            CHECK(d == got->delay_ns);
            ++feasible_cases;
        }
    }
    CHECK(feasible_cases > 50);
}

TEST_CASE("pricing: zero duals admit, saturated lambda blocks") {
    NetworkInstance inst =
        make_instance(3, {{0, 1, 5.0, 50000}, {1, 2, 5.0, 50000}}, 10.0, 20.0, 0.0);
    std::vector<FlowSpec> flows =
        with_catalogs(inst, {make_flow("f0", "a0", "a2", 2'000'000'000, 3000, 1000.0)});
    REQUIRE_FALSE(flows[0].patterns.empty());

    DualValues duals;
    duals.lambda.assign(1, 0.0);
    duals.mu.assign(inst.arcs.size(), 0.0);
    duals.omega.assign(inst.nodes.size(), 0.0);

    auto col = pricing(inst, flows, 0, 0, duals);
    REQUIRE(col.has_value());  // reduced cost R > 0 under zero duals
    CHECK(col->path_pattern.arcs == std::vector<int>{0, 1});

    duals.lambda[0] = static_cast<double>(flows[0].throughput_bps);
    CHECK_FALSE(pricing(inst, flows, 0, 0, duals).has_value());
}

TEST_CASE("pricing matches exhaustive search under hand-set duals") {
    Rng rng(77);
    for (int t = 0; t < 60; ++t) {
        NetworkInstance inst = random_instance(rng, 6);
        std::vector<FlowSpec> flows = random_flows(rng, inst, 1);
        if (flows[0].patterns.empty()) continue;

        DualValues duals;
        duals.lambda.assign(1, rng.uniform(0, 3) * 2.5e8);
        duals.mu.assign(inst.arcs.size(), 0.0);
        duals.omega.assign(inst.nodes.size(), 0.0);
        for (size_t a = 0; a < inst.arcs.size(); ++a) duals.mu[a] = rng.uniform(0, 40000) * 1.0;
        for (size_t v = 0; v < inst.nodes.size(); ++v) duals.omega[v] = rng.uniform(0, 20000) * 1.0;

        for (int k = 0; k < static_cast<int>(flows[0].patterns.size()); ++k) {
            const FlowSpec& f = flows[0];
            Nanoseconds budget = f.deadline_ns - shaping_delay(f, f.patterns[k], inst.cycle);
            double beta = static_cast<double>(max_reservation(f.patterns[k]));

            std::vector<double> cost(inst.arcs.size());
            std::vector<Nanoseconds> delay(inst.arcs.size());
            for (size_t a = 0; a < inst.arcs.size(); ++a) {
                cost[a] = duals.mu[a] + duals.omega[inst.node_index.at(inst.arcs[a].head)];
                delay[a] = arc_delay(inst, static_cast<int>(a));
            }
            std::optional<std::pair<double, Nanoseconds>> best;
            if (budget >= 0) best = csp_brute_force(inst, cost, delay, budget, f.src, f.dst);
            bool expect = false;
            if (best) {
                double rhs = static_cast<double>(f.throughput_bps) -
                             (duals.lambda[0] + beta * duals.omega[inst.node_index.at(f.src)]);
                expect = beta * best->first < rhs - 1e-6 * f.throughput_bps;
            }
            auto col = pricing(inst, flows, 0, k, duals);
            CHECK(col.has_value() == expect);
            if (col && best) {
                double got = 0;
                for (int a : col->path_pattern.arcs) got += cost[a];
                CHECK(std::abs(got - best->first) <= 1e-9);
            }
        }
    }
}

TEST_CASE("run_cg: unique feasible path per flow and ample capacity") {
    NetworkInstance inst = make_instance(
        4, {{0, 1, 5.0, 500000}, {1, 2, 5.0, 500000}, {2, 3, 5.0, 500000}}, 10.0, 20.0, 0.0,
        5'000'000);
    std::vector<FlowSpec> flows = with_catalogs(
        inst, {make_flow("f0", "a0", "a3", 3'000'000'000, 1500, 1000.0),
               make_flow("f1", "a1", "a3", 2'000'000'000, 1500, 1000.0)});
    CgState cg = run_cg(inst, flows);
    CHECK(cg.certified);
    CHECK(cg.upper_bound == doctest::Approx(5e9));
    CHECK(cg.iterations >= 1);
    CHECK_FALSE(cg.pool.empty());

    // first iteration always generates columns from the all-zero duals
    CHECK(cg.log.front().columns_added >= 1);

    // LP value is monotone over iterations
    for (size_t i = 1; i < cg.log.size(); ++i) {
        CHECK(cg.log[i].lp_objective >= cg.log[i - 1].lp_objective - 1e-6);
    }
}

TEST_CASE("run_cg reaches the fully enumerated LP optimum") {
    Rng rng(909);
    int checked = 0;
    for (int t = 0; t < 12; ++t) {
        NetworkInstance inst = random_instance(rng, 8);
        std::vector<FlowSpec> flows = random_flows(rng, inst, 4);
        CgState cg = run_cg(inst, flows);
        REQUIRE(cg.certified);

        std::vector<Column> all = enumerate_all_columns(inst, flows);
        LinearProgram full = build_master(inst, flows, all);
        LpSolution sol = solve_lp(full);
        REQUIRE(sol.status == LpStatus::optimal);
        CHECK(std::abs(cg.upper_bound - sol.objective) <= 1e-6 * (1.0 + std::abs(sol.objective)));

        // termination certificate: no column prices through the final duals
        for (int f = 0; f < static_cast<int>(flows.size()); ++f) {
            for (int k = 0; k < static_cast<int>(flows[f].patterns.size()); ++k) {
                CHECK_FALSE(pricing(inst, flows, f, k, cg.duals).has_value());
            }
        }
        // dual feasibility over every generated column
        for (const Column& c : cg.pool) {
            const FlowSpec& f = flows[c.flow_index];
            double beta = static_cast<double>(c.path_pattern.beta_bytes);
            double lhs = cg.duals.lambda[c.flow_index] +
                         beta * cg.duals.omega[inst.node_index.at(f.src)];
            for (int a : c.path_pattern.arcs) {
                lhs += beta * (cg.duals.mu[a] +
                               cg.duals.omega[inst.node_index.at(inst.arcs[a].head)]);
            }
            CHECK(lhs >= static_cast<double>(f.throughput_bps) -
                             1e-5 * (1.0 + f.throughput_bps));
        }
        ++checked;
    }
    CHECK(checked == 12);
}

TEST_CASE("round_ilp: integral relaxation closes the gap at zero") {
    NetworkInstance inst =
        make_instance(3, {{0, 1, 5.0, 500000}, {1, 2, 5.0, 500000}}, 10.0, 20.0, 0.0, 5'000'000);
    std::vector<FlowSpec> flows =
        with_catalogs(inst, {make_flow("f0", "a0", "a2", 4'000'000'000, 1500, 1000.0)});
    CgState cg = run_cg(inst, flows);
    auto [sol, rep] = round_ilp(inst, flows, cg);
    CHECK(sol.accepted_throughput_bps == 4'000'000'000);
    CHECK(rep.gap_percent == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rep.integer_objective <= rep.upper_bound + 1e-6);
    CHECK(check_admission(inst, flows, sol).ok());
}

TEST_CASE("round_ilp matches the exhaustive per-flow assignment oracle") {
    Rng rng(1717);
    int checked = 0;
    for (int t = 0; t < 10; ++t) {
        NetworkInstance inst = random_instance(rng, 7);
        std::vector<FlowSpec> flows = random_flows(rng, inst, 4);
        CgState cg = run_cg(inst, flows);
        REQUIRE(cg.certified);
        auto [sol, rep] = round_ilp(inst, flows, cg);
        CHECK(check_admission(inst, flows, sol).ok());

        // effective pool: generated columns plus the baseline's candidates
        std::vector<Column> pool = cg.pool;
        for (int f = 0; f < static_cast<int>(flows.size()); ++f) {
            auto col = ospf_candidate_column(inst, flows, f);
            if (col) pool.push_back(std::move(*col));
        }
        std::int64_t oracle = exhaustive_admission_optimum(inst, flows, pool);
        CHECK(sol.accepted_throughput_bps == oracle);
        CHECK(static_cast<double>(sol.accepted_throughput_bps) <= rep.upper_bound + 1e-3);
        ++checked;
    }
    CHECK(checked == 10);
}

TEST_CASE("a flow with no feasible path-pattern is rejected up front") {
    NetworkInstance inst =
        make_instance(3, {{0, 1, 30.0, 500000}, {1, 2, 30.0, 500000}}, 10.0, 20.0, 0.0);
    std::vector<FlowSpec> flows = with_catalogs(
        inst, {make_flow("f0", "a0", "a2", 1'000'000'000, 1500, 1000.0),
               make_flow("f1", "a0", "a2", 1'000'000'000, 1500, 50.0)});  // unreachable deadline
    CHECK_FALSE(flows[0].patterns.empty());
    CHECK(flows[1].patterns.empty());

    CgState cg = run_cg(inst, flows);
    CHECK(cg.certified);
    CHECK(cg.upper_bound == doctest::Approx(1e9));
    auto [sol, rep] = round_ilp(inst, flows, cg);
    CHECK(sol.flows[0].accepted);
    CHECK_FALSE(sol.flows[1].accepted);
    CHECK(sol.accepted_throughput_bps == 1'000'000'000);
}

TEST_CASE("optimality_gap formula and conventions") {
    CHECK(optimality_gap(100.0, 100.0) == doctest::Approx(0.0));
    CHECK(optimality_gap(100.0, 98.0) == doctest::Approx(2.0));
    CHECK(optimality_gap(0.0, 0.0) == 0.0);
    CHECK(optimality_gap(50.0, 50.0 + 1e-9) == 0.0);  // clamped from below
}

TEST_CASE("solution json round trip") {
    AdmissionSolution sol;
    sol.algorithm = "cgx";
    sol.accepted_throughput_bps = 5'000'000'000;
    sol.upper_bound_bps = 5.5e9;
    sol.gap_percent = 9.0909;
    FlowDecision acc;
    acc.flow_id = "f0";
    acc.accepted = true;
    acc.path = {"a0", "a1"};
    acc.pattern = {2, 4500};
    sol.flows.push_back(acc);
    FlowDecision rej;
    rej.flow_id = "f1";
    sol.flows.push_back(rej);

    AdmissionSolution back = solution_from_json(solution_to_json(sol));
    CHECK(back.algorithm == "cgx");
    REQUIRE(back.flows.size() == 2);
    CHECK(back.flows[0].accepted);
    CHECK(back.flows[0].path == std::vector<NodeId>{"a0", "a1"});
    CHECK(back.flows[0].pattern.period_cycles == 2);
    CHECK(back.flows[0].pattern.chunk_bytes == 4500);
    CHECK_FALSE(back.flows[1].accepted);
    CHECK(back.accepted_throughput_bps == 5'000'000'000);
}

TEST_CASE("check_admission rejects overloads and bad paths") {
    NetworkInstance inst =
        make_instance(3, {{0, 1, 5.0, 4000}, {1, 2, 5.0, 4000}}, 10.0, 20.0, 0.0, 4000);
    std::vector<FlowSpec> flows = with_catalogs(
        inst, {make_flow("f0", "a0", "a2", 1'000'000'000, 1500, 1000.0),
               make_flow("f1", "a0", "a2", 1'000'000'000, 1500, 1000.0)});

    AdmissionSolution sol;
    sol.algorithm = "cgx";
    for (const FlowSpec& f : flows) {
        FlowDecision d;
        d.flow_id = f.id;
        d.accepted = true;
        d.path = {"a0", "a1", "a2"};
        d.pattern = f.patterns[0];  // beta 3000 each; 6000 > 4000 capacity
        sol.flows.push_back(d);
    }
    CHECK_FALSE(check_admission(inst, flows, sol).ok());

    sol.flows[1].accepted = false;
    CHECK(check_admission(inst, flows, sol).ok());

    sol.flows[0].path = {"a0", "a2"};  // no such arc
    CHECK_FALSE(check_admission(inst, flows, sol).ok());
}
