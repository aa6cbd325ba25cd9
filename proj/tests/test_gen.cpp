#include <queue>
#include <set>

#include "doctest.h"

#include "dldn/gen.hpp"
#include "dldn/instance_io.hpp"

using namespace dldn;

namespace {

bool connected(const NetworkInstance& inst) {
    if (inst.nodes.empty()) return false;
    std::set<NodeId> seen{inst.nodes[0].id};
    std::queue<NodeId> q;
    q.push(inst.nodes[0].id);
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        for (const ArcSpec& a : inst.arcs) {
            if (a.tail == u && !seen.count(a.head)) {
                seen.insert(a.head);
                q.push(a.head);
            }
        }
    }
    return seen.size() == inst.nodes.size();
}

} // namespace

TEST_CASE("generate_topology at survey scale: 505 nodes, 1061 links, 2122 arcs") {
    GenSpec spec;
    spec.node_count = 505;
    spec.link_count = 1061;
    spec.capacity_level = 10;
    spec.seed = 7;
    NetworkInstance inst = generate_topology(spec);
    CHECK(inst.nodes.size() == 505);
    CHECK(inst.arcs.size() == 2122);
    CHECK(validate_instance(inst).ok());
    for (const ArcSpec& a : inst.arcs) {
        CHECK(a.prop_ns >= 1);
        CHECK(a.prop_ns <= us_to_ns(40));
    }
}

TEST_CASE("generate_topology: desk scale is connected and valid") {
    GenSpec spec;
    spec.node_count = 50;
    spec.link_count = 106;
    spec.capacity_level = 10;
    spec.seed = 17;
    NetworkInstance inst = generate_topology(spec);
    CHECK(validate_instance(inst).ok());
    CHECK(connected(inst));
    CHECK(inst.arcs.size() == 212);
    // level 10: 10 x 100 Gb/s over 10 us is 1.25 MB per cycle, buffers 12.5 Mb
    CHECK(inst.arcs[0].capacity_bytes_per_cycle == 1'250'000);
    CHECK(inst.nodes[0].buffer_bytes == 12'500'000);
    CHECK(inst.nodes[0].queuing_bound_ns == 2 * inst.cycle.cycle_ns);
}

TEST_CASE("generate_topology: capacity level scales linearly") {
    GenSpec spec;
    spec.node_count = 10;
    spec.link_count = 14;
    spec.capacity_level = 1;
    NetworkInstance inst = generate_topology(spec);
    CHECK(inst.arcs[0].capacity_bytes_per_cycle == 125'000);  // 100 Gb/s x 10 us / 8
    CHECK(inst.nodes[0].buffer_bytes == 1'250'000);           // 10 Mb

    // serialization consistency: the per-cycle budget is exactly one cycle at line rate
    double line_bps = 1e11 * spec.capacity_level;
    CHECK(line_bps * inst.cycle.cycle_ns / 8e9 >= inst.arcs[0].capacity_bytes_per_cycle);
}

TEST_CASE("generate_topology: minimal and broken specs") {
    GenSpec two;
    two.node_count = 2;
    two.link_count = 1;
    NetworkInstance inst = generate_topology(two);
    CHECK(inst.nodes.size() == 2);
    CHECK(inst.arcs.size() == 2);
    CHECK(validate_instance(inst).ok());

    GenSpec bad;
    bad.node_count = 5;
    bad.link_count = 3;  // below n-1
    CHECK_THROWS_AS(generate_topology(bad), GenError);

    GenSpec level;
    level.node_count = 5;
    level.link_count = 5;
    level.capacity_level = 11;
    CHECK_THROWS_AS(generate_topology(level), GenError);
}

TEST_CASE("generate determinism: identical spec and seed give identical bytes") {
    GenSpec spec;
    spec.node_count = 20;
    spec.link_count = 35;
    spec.flow_count = 15;
    spec.seed = 99;
    NetworkInstance i1 = generate_topology(spec);
    NetworkInstance i2 = generate_topology(spec);
    auto f1 = generate_flows(spec, i1);
    auto f2 = generate_flows(spec, i2);
    CHECK(instance_to_json(i1, &f1) == instance_to_json(i2, &f2));

    spec.seed = 100;
    NetworkInstance i3 = generate_topology(spec);
    CHECK(instance_to_json(i1, nullptr) != instance_to_json(i3, nullptr));
}

TEST_CASE("generate_flows: counts, defaults and catalogs") {
    GenSpec spec;
    spec.node_count = 12;
    spec.link_count = 20;
    spec.flow_count = 100;
    spec.deadline_us = 1000.0;
    spec.seed = 3;
    NetworkInstance inst = generate_topology(spec);
    auto flows = generate_flows(spec, inst);
    REQUIRE(flows.size() == 100);
    for (const FlowSpec& f : flows) {
        CHECK(f.src != f.dst);
        CHECK(f.rate_bps == f.throughput_bps);  // generator default r = R
        CHECK(f.burst_bytes == 1500);
        CHECK(f.deadline_ns == us_to_ns(1000));
        CHECK(f.throughput_bps >= 1'000'000'000);
        CHECK(f.throughput_bps <= 10'000'000'000);
        CHECK(f.throughput_bps % 1'000'000'000 == 0);
        CHECK_FALSE(f.patterns.empty());
        for (const TransmissionPattern& p : f.patterns) {
            CHECK(spec.hypercycle % p.period_cycles == 0);
            CHECK(p.chunk_bytes % f.packet_bytes == 0);
        }
    }

    GenSpec none = spec;
    none.flow_count = 0;
    CHECK(generate_flows(none, inst).empty());

    GenSpec point = spec;
    point.throughput_min_bps = point.throughput_max_bps = 4'000'000'000;
    for (const FlowSpec& f : generate_flows(point, inst)) {
        CHECK(f.throughput_bps == 4'000'000'000);
    }
}
