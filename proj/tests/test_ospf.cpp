#include "doctest.h"

#include "dldn/instance_io.hpp"
#include "dldn/ospf.hpp"
#include "dldn/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dldn;
using namespace dldn::testing;

TEST_CASE("ospf_weights: inverse capacity rule") {
    NetworkInstance inst = make_instance(2, {{0, 1, 1.0, 12'500'000}}, 10.0, 20.0, 0.0);
    std::vector<double> w = ospf_weights(inst);
    CHECK(w[0] == doctest::Approx(1.0));  // 1e8 / (8 * 12.5e6)

    inst.arcs[0].capacity_bytes_per_cycle *= 2;
    CHECK(ospf_weights(inst)[0] == doctest::Approx(0.5));

    NetworkInstance two =
        make_instance(3, {{0, 1, 1.0, 1'250'000}, {1, 2, 1.0, 125'000}}, 10.0, 20.0, 0.0);
    std::vector<double> ws = ospf_weights(two);
    CHECK(ws[1] / ws[0] == doctest::Approx(10.0));  // 100G-class vs 10G-class
}

TEST_CASE("ospf_admit: single flow, greedy order, rejection on saturation") {
    NetworkInstance inst =
        make_instance(3, {{0, 1, 5.0, 3000}, {1, 2, 5.0, 3000}}, 10.0, 20.0, 0.0, 100'000);
    std::vector<FlowSpec> flows = {make_flow("f0", "a0", "a2", 1'000'000'000, 1500, 1000.0),
                                   make_flow("f1", "a0", "a2", 1'000'000'000, 1500, 1000.0)};
    attach_pattern_catalogs(inst, flows);

    AdmissionSolution sol = ospf_admit(inst, flows);
    CHECK(sol.algorithm == "ospf");
    CHECK(sol.flows[0].accepted);
    // m=1 and m=2 tie at beta 3000 here; catalog order keeps m=1
    CHECK(sol.flows[0].pattern.period_cycles == 1);
    CHECK(max_reservation(sol.flows[0].pattern) == 3000);
    CHECK_FALSE(sol.flows[1].accepted);  // arc residual exhausted
    CHECK(check_admission(inst, flows, sol).ok());
}

TEST_CASE("ospf_admit denies the second of two arc-saturating flows") {
    NetworkInstance inst = make_instance(2, {{0, 1, 5.0, 3500}}, 10.0, 20.0, 0.0, 100'000);
    std::vector<FlowSpec> flows = {make_flow("f0", "a0", "a1", 1'000'000'000, 1500, 1000.0),
                                   make_flow("f1", "a0", "a1", 1'000'000'000, 1500, 1000.0)};
    attach_pattern_catalogs(inst, flows);
    AdmissionSolution sol = ospf_admit(inst, flows);
    REQUIRE(sol.flows[0].accepted);
    CHECK_FALSE(sol.flows[1].accepted);  // greedy input order decides
    CHECK(sol.accepted_throughput_bps == 1'000'000'000);
}

TEST_CASE("ospf_admit replays a hand-computed greedy run") {
    // Six nodes: cheap wide path a0-a1-a5 (100G-class) vs short thin a0-a5.
    NetworkInstance inst = make_instance(6,
                                         {
                                             {0, 1, 1.0, 1'250'000},
                                             {1, 5, 1.0, 1'250'000},
                                             {0, 5, 1.0, 12'500},
                                             {0, 2, 1.0, 125'000},
                                             {2, 3, 1.0, 125'000},
                                             {3, 4, 1.0, 125'000},
                                             {4, 5, 1.0, 125'000},
                                         },
                                         10.0, 20.0, 0.0, 10'000'000);
    std::vector<FlowSpec> flows = {make_flow("f0", "a0", "a5", 2'000'000'000, 1500, 1000.0),
                                   make_flow("f1", "a0", "a5", 1'000'000'000, 1500, 1000.0),
                                   make_flow("f2", "a0", "a3", 1'000'000'000, 1500, 1000.0)};
    attach_pattern_catalogs(inst, flows);

    // Hand replay: weights w = 1e8/(8c): wide arcs 0.01, thin a0->a5 0.8,
    // 10G-class arcs 0.1. Dijkstra a0->a5 picks a0-a1-a5 (0.02). All three
    // flows fit residuals on their shortest paths.
    AdmissionSolution sol = ospf_admit(inst, flows);
    CHECK(sol.flows[0].accepted);
    CHECK(sol.flows[0].path == std::vector<NodeId>{"a0", "a1", "a5"});
    CHECK(sol.flows[1].accepted);
    CHECK(sol.flows[1].path == std::vector<NodeId>{"a0", "a1", "a5"});
    CHECK(sol.flows[2].accepted);
    CHECK(sol.flows[2].path == std::vector<NodeId>{"a0", "a2", "a3"});
    CHECK(check_admission(inst, flows, sol).ok());
}

TEST_CASE("ospf_admit output always satisfies the integer feasibility recheck") {
    Rng rng(4242);
    for (int t = 0; t < 30; ++t) {
        NetworkInstance inst = random_instance(rng, 9);
        std::vector<FlowSpec> flows = random_flows(rng, inst, 6);
        AdmissionSolution sol = ospf_admit(inst, flows);
        CHECK(check_admission(inst, flows, sol).ok());
        std::int64_t th = 0;
        for (size_t i = 0; i < flows.size(); ++i) {
            if (sol.flows[i].accepted) th += flows[i].throughput_bps;
        }
        CHECK(th == sol.accepted_throughput_bps);
    }
}

TEST_CASE("throughput_gap conventions") {
    AdmissionSolution a;
    a.accepted_throughput_bps = 10;
    AdmissionSolution b;
    b.accepted_throughput_bps = 10;
    CHECK(throughput_gap(a, b).value() == doctest::Approx(100.0));
    a.accepted_throughput_bps = 20;
    CHECK(throughput_gap(a, b).value() == doctest::Approx(200.0));
    b.accepted_throughput_bps = 0;
    CHECK_FALSE(throughput_gap(a, b).has_value());
}

TEST_CASE("rounding pool augmentation keeps cgx at or above ospf") {
    Rng rng(555);
    for (int t = 0; t < 12; ++t) {
        NetworkInstance inst = random_instance(rng, 8);
        std::vector<FlowSpec> flows = random_flows(rng, inst, 5);
        CgState cg = run_cg(inst, flows);
        auto [sol, rep] = round_ilp(inst, flows, cg);
        AdmissionSolution base = ospf_admit(inst, flows);
        CHECK(sol.accepted_throughput_bps >= base.accepted_throughput_bps);
        auto gap = throughput_gap(sol, base);
        if (gap) CHECK(*gap >= 100.0 - 1e-9);
    }
}
