#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dldn/units.hpp"

namespace dldn {

using NodeId = std::string;

// Base scheduling period T, hypercycle length and queues per port.
struct CycleConfig {
    Nanoseconds cycle_ns = 10'000;  // T
    int hypercycle = 8;             // HC, in cycles
    int queues_per_port = 3;        // N, >= 3

    Nanoseconds hypercycle_ns() const { return cycle_ns * hypercycle; }
};

struct NodeSpec {
    NodeId id;
    Nanoseconds queuing_bound_ns = 0;    // Q, worst-case queuing at this node's ports
    Nanoseconds processing_ns = 0;       // P, constant per-packet processing
    Bytes buffer_bytes = 0;              // c_v, shared over all ports
};

struct ArcSpec {
    NodeId tail;
    NodeId head;
    Nanoseconds prop_ns = 0;             // propagation tail -> head
    Bytes capacity_bytes_per_cycle = 0;  // c_a, per-cycle byte budget
};

// A regular reservation of chunk_bytes every period_cycles * T.
struct TransmissionPattern {
    int period_cycles = 1;   // m, divides the hypercycle; T_res = m * T
    Bytes chunk_bytes = 0;   // b', bytes reservable per period
};

struct FlowSpec {
    std::string id;
    NodeId src;        // ingress gateway
    NodeId dst;        // egress gateway
    BitsPerSecond rate_bps = 0;        // r, arrival-curve rate
    Bytes burst_bytes = 0;             // b, arrival-curve burst
    BitsPerSecond throughput_bps = 0;  // R, objective weight on acceptance
    Nanoseconds deadline_ns = 0;       // D, max end-to-end delay
    Bytes packet_bytes = 1500;         // max packet size used when shaping
    std::vector<TransmissionPattern> patterns;  // candidate shaping patterns
};

struct NetworkInstance {
    CycleConfig cycle;
    std::vector<NodeSpec> nodes;
    std::vector<ArcSpec> arcs;
    std::map<NodeId, int> node_index;  // id -> position in nodes
    std::map<std::pair<NodeId, NodeId>, int> arc_index;

    void rebuild_indices();
    const NodeSpec* find_node(const NodeId& id) const;
    const ArcSpec* find_arc(const NodeId& tail, const NodeId& head) const;
};

// A (flow, path, pattern) choice whose end-to-end delay fits the deadline.
struct PathPattern {
    std::string flow_id;
    std::vector<int> arcs;      // arc indices into NetworkInstance::arcs, src -> dst
    int pattern_index = 0;      // k, into FlowSpec::patterns
    Nanoseconds total_delay_ns = 0;  // sum of arc delays plus shaping delay
    Bytes beta_bytes = 0;            // worst-case per-cycle reservation
};

struct E2eBounds {
    Nanoseconds delay_ns = 0;   // sum of per-pair constant delays, last hop at its bound
    Nanoseconds jitter_ns = 0;  // queuing bound of the last node
};

struct ValidationIssue {
    std::string where;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> errors;
    bool ok() const { return errors.empty(); }
};

// l_a = Q(tail) + P(head) + Prop(tail->head)
Nanoseconds arc_delay(const ArcSpec& arc, const NodeSpec& tail, const NodeSpec& head);
Nanoseconds arc_delay(const NetworkInstance& inst, int arc_idx);

// Shaping delay of the last packet of a maximal burst: T_res * ceil(b / b').
Nanoseconds shaping_delay(const FlowSpec& flow, const TransmissionPattern& pattern,
                          const CycleConfig& cycle);

// Worst per-cycle load a shaped flow can present downstream: 2b' when the
// pattern period equals the cycle, b' otherwise.
Bytes max_reservation(const TransmissionPattern& pattern);

// Membership test for the feasible path-pattern set: returns the PathPattern
// when sum of arc delays plus shaping delay fits the flow deadline.
std::optional<PathPattern> path_feasibility(const NetworkInstance& inst, const FlowSpec& flow,
                                            int pattern_index, const std::vector<int>& arc_path);

// Delay and jitter bounds along a feasible path. shaping_ns is added when the
// caller wants the bound measured from ingress burst arrival.
E2eBounds e2e_bounds(const PathPattern& pp, const NetworkInstance& inst,
                     Nanoseconds shaping_ns = 0);

ValidationReport validate_instance(const NetworkInstance& inst);
ValidationReport validate_flows(const NetworkInstance& inst, const std::vector<FlowSpec>& flows);

// Candidate patterns for a flow: one per divisor m of the hypercycle, with b'
// the smallest multiple of the flow's packet size that sustains the arrival
// rate over m cycles. Patterns whose shaping delay exceeds what any path can
// absorb are pruned (min_path_delay_ns = least sum of arc delays src -> dst,
// negative when no path exists).
std::vector<TransmissionPattern> build_pattern_catalog(const FlowSpec& flow,
                                                       const CycleConfig& cycle,
                                                       Nanoseconds min_path_delay_ns);

// Least-delay path src -> dst under arc_delay, or nullopt when disconnected.
std::optional<std::vector<int>> min_delay_path(const NetworkInstance& inst, const NodeId& src,
                                               const NodeId& dst);
Nanoseconds path_delay(const NetworkInstance& inst, const std::vector<int>& arc_path);

// Nodes visited by an arc path, source first.
std::vector<int> path_nodes(const NetworkInstance& inst, const std::vector<int>& arc_path);

} // namespace dldn
