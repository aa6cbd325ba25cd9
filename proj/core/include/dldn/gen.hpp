#pragma once

#include <cstdint>
#include <vector>

#include "dldn/model.hpp"

namespace dldn {

// Parameters for the seeded instance families: a capacity level in 1..10
// scales link and buffer capacities, flows share one deadline.
struct GenSpec {
    int node_count = 50;
    int link_count = 106;          // undirected links; each becomes two arcs
    double max_prop_us = 40.0;
    int capacity_level = 10;       // i: links i x 100 Gb/s, buffers i x 10 Mb
    int flow_count = 100;
    double deadline_us = 1000.0;
    Bytes burst_bytes = 1500;
    Bytes packet_bytes = 1500;
    BitsPerSecond throughput_min_bps = 1'000'000'000;
    BitsPerSecond throughput_max_bps = 10'000'000'000;
    double cycle_us = 10.0;        // T
    int hypercycle = 8;            // HC
    int queues_per_port = 3;       // N
    std::uint64_t seed = 1;
};

struct GenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Connected digraph: a random spanning tree plus extra links, both directions
// per link. Throws GenError when the spec cannot produce one.
NetworkInstance generate_topology(const GenSpec& spec);

// Seeded flows with random endpoints; r = R; pattern catalogs attached.
std::vector<FlowSpec> generate_flows(const GenSpec& spec, const NetworkInstance& inst);

} // namespace dldn
