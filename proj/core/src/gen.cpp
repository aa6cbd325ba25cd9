#include "dldn/gen.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "dldn/instance_io.hpp"
#include "dldn/rng.hpp"

namespace dldn {

NetworkInstance generate_topology(const GenSpec& spec) {
    if (spec.node_count < 2) throw GenError("need at least 2 nodes");
    if (spec.link_count < spec.node_count - 1) {
        throw GenError("link count below node_count - 1 cannot be connected");
    }
    std::int64_t max_links =
        static_cast<std::int64_t>(spec.node_count) * (spec.node_count - 1) / 2;
    if (spec.link_count > max_links) throw GenError("link count exceeds simple-graph maximum");
    if (spec.capacity_level < 1 || spec.capacity_level > 10) {
        throw GenError("capacity level must be in 1..10");
    }

    NetworkInstance inst;
    inst.cycle.cycle_ns = us_to_ns(spec.cycle_us);
    inst.cycle.hypercycle = spec.hypercycle;
    inst.cycle.queues_per_port = spec.queues_per_port;

    Rng rng(spec.seed);
    Nanoseconds q_default = 2 * inst.cycle.cycle_ns;
    // Level i: links carry i x 100 Gb/s, buffers hold i x 10 Mb.
    Bytes link_capacity = ceil_div(std::int64_t{spec.capacity_level} * 100'000'000'000 *
                                       inst.cycle.cycle_ns,
                                   std::int64_t{8} * 1'000'000'000);
    Bytes buffer = std::int64_t{spec.capacity_level} * 10'000'000 / 8;

    int digits = 1;
    for (int v = spec.node_count - 1; v >= 10; v /= 10) ++digits;
    for (int i = 0; i < spec.node_count; ++i) {
        std::string num = std::to_string(i);
        NodeSpec n;
        n.id = "n" + std::string(digits - num.size(), '0') + num;
        n.queuing_bound_ns = q_default;
        n.processing_ns = 0;
        n.buffer_bytes = buffer;
        inst.nodes.push_back(std::move(n));
    }

    Nanoseconds max_prop = us_to_ns(spec.max_prop_us);
    auto add_link = [&](int u, int v) {
        Nanoseconds prop = rng.uniform(1, std::max<Nanoseconds>(max_prop, 1));
        ArcSpec fwd{inst.nodes[u].id, inst.nodes[v].id, prop, link_capacity};
        ArcSpec rev{inst.nodes[v].id, inst.nodes[u].id, prop, link_capacity};
        inst.arcs.push_back(std::move(fwd));
        inst.arcs.push_back(std::move(rev));
    };

    // Random spanning tree: attach each node to a uniformly chosen earlier one.
    std::vector<int> order(spec.node_count);
    for (int i = 0; i < spec.node_count; ++i) order[i] = i;
    for (int i = spec.node_count - 1; i > 0; --i) {
        std::swap(order[i], order[rng.uniform(0, i)]);
    }
    std::set<std::pair<int, int>> used;
    for (int i = 1; i < spec.node_count; ++i) {
        int u = order[i];
        int v = order[rng.uniform(0, i - 1)];
        used.insert({std::min(u, v), std::max(u, v)});
        add_link(u, v);
    }
    int remaining = spec.link_count - (spec.node_count - 1);
    while (remaining > 0) {
        int u = static_cast<int>(rng.uniform(0, spec.node_count - 1));
        int v = static_cast<int>(rng.uniform(0, spec.node_count - 1));
        if (u == v) continue;
        if (!used.insert({std::min(u, v), std::max(u, v)}).second) continue;
        add_link(u, v);
        --remaining;
    }

    inst.rebuild_indices();
    return inst;
}

std::vector<FlowSpec> generate_flows(const GenSpec& spec, const NetworkInstance& inst) {
    Rng rng(spec.seed ^ 0xf1ea5eedull);
    std::vector<FlowSpec> flows;
    flows.reserve(spec.flow_count);
    int digits = 1;
    for (int v = std::max(spec.flow_count - 1, 1); v >= 10; v /= 10) ++digits;
    BitsPerSecond step = 1'000'000'000;  // throughputs drawn in whole Gb/s
    std::int64_t lo = spec.throughput_min_bps / step;
    std::int64_t hi = std::max(lo, spec.throughput_max_bps / step);
    for (int i = 0; i < spec.flow_count; ++i) {
        FlowSpec f;
        std::string num = std::to_string(i);
        f.id = "f" + std::string(digits - num.size(), '0') + num;
        int s = static_cast<int>(rng.uniform(0, static_cast<int>(inst.nodes.size()) - 1));
        int t = static_cast<int>(rng.uniform(0, static_cast<int>(inst.nodes.size()) - 2));
        if (t >= s) ++t;
        f.src = inst.nodes[s].id;
        f.dst = inst.nodes[t].id;
        f.throughput_bps = rng.uniform(lo, hi) * step;
        f.rate_bps = f.throughput_bps;
        f.burst_bytes = spec.burst_bytes;
        f.packet_bytes = spec.packet_bytes;
        f.deadline_ns = us_to_ns(spec.deadline_us);
        flows.push_back(std::move(f));
    }
    attach_pattern_catalogs(inst, flows);
    return flows;
}

} // namespace dldn
