#include "dldn/model.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace dldn {

void NetworkInstance::rebuild_indices() {
    node_index.clear();
    arc_index.clear();
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
        node_index[nodes[i].id] = i;
    }
    for (int i = 0; i < static_cast<int>(arcs.size()); ++i) {
        arc_index[{arcs[i].tail, arcs[i].head}] = i;
    }
}

const NodeSpec* NetworkInstance::find_node(const NodeId& id) const {
    auto it = node_index.find(id);
    return it == node_index.end() ? nullptr : &nodes[it->second];
}

const ArcSpec* NetworkInstance::find_arc(const NodeId& tail, const NodeId& head) const {
    auto it = arc_index.find({tail, head});
    return it == arc_index.end() ? nullptr : &arcs[it->second];
}

Nanoseconds arc_delay(const ArcSpec& arc, const NodeSpec& tail, const NodeSpec& head) {
    if (arc.tail != tail.id || arc.head != head.id) {
        throw std::invalid_argument("arc_delay: endpoints do not match arc " + arc.tail + "->" +
                                    arc.head);
    }
    return tail.queuing_bound_ns + head.processing_ns + arc.prop_ns;
}

Nanoseconds arc_delay(const NetworkInstance& inst, int arc_idx) {
    const ArcSpec& a = inst.arcs.at(arc_idx);
    return arc_delay(a, *inst.find_node(a.tail), *inst.find_node(a.head));
}

Nanoseconds shaping_delay(const FlowSpec& flow, const TransmissionPattern& pattern,
                          const CycleConfig& cycle) {
    if (pattern.chunk_bytes <= 0) {
        throw std::invalid_argument("shaping_delay: chunk_bytes must be positive");
    }
    Nanoseconds t_res = cycle.cycle_ns * pattern.period_cycles;
    return t_res * ceil_div(flow.burst_bytes, pattern.chunk_bytes);
}

Bytes max_reservation(const TransmissionPattern& pattern) {
    return pattern.period_cycles == 1 ? 2 * pattern.chunk_bytes : pattern.chunk_bytes;
}

Nanoseconds path_delay(const NetworkInstance& inst, const std::vector<int>& arc_path) {
    Nanoseconds total = 0;
    for (int a : arc_path) total += arc_delay(inst, a);
    return total;
}

std::vector<int> path_nodes(const NetworkInstance& inst, const std::vector<int>& arc_path) {
    std::vector<int> out;
    if (arc_path.empty()) return out;
    out.push_back(inst.node_index.at(inst.arcs[arc_path.front()].tail));
    for (int a : arc_path) out.push_back(inst.node_index.at(inst.arcs[a].head));
    return out;
}

std::optional<PathPattern> path_feasibility(const NetworkInstance& inst, const FlowSpec& flow,
                                            int pattern_index, const std::vector<int>& arc_path) {
    if (arc_path.empty()) throw std::invalid_argument("path_feasibility: empty path");
    if (inst.arcs.at(arc_path.front()).tail != flow.src ||
        inst.arcs.at(arc_path.back()).head != flow.dst) {
        throw std::invalid_argument("path_feasibility: path does not connect " + flow.src + "->" +
                                    flow.dst);
    }
    for (size_t i = 1; i < arc_path.size(); ++i) {
        if (inst.arcs[arc_path[i - 1]].head != inst.arcs[arc_path[i]].tail) {
            throw std::invalid_argument("path_feasibility: disconnected arc sequence");
        }
    }
    const TransmissionPattern& pat = flow.patterns.at(pattern_index);
    Nanoseconds total = path_delay(inst, arc_path) + shaping_delay(flow, pat, inst.cycle);
    if (total > flow.deadline_ns) return std::nullopt;
    PathPattern pp;
    pp.flow_id = flow.id;
    pp.arcs = arc_path;
    pp.pattern_index = pattern_index;
    pp.total_delay_ns = total;
    pp.beta_bytes = max_reservation(pat);
    return pp;
}

E2eBounds e2e_bounds(const PathPattern& pp, const NetworkInstance& inst, Nanoseconds shaping_ns) {
    std::vector<int> nodes = path_nodes(inst, pp.arcs);
    if (nodes.empty()) throw std::invalid_argument("e2e_bounds: empty path");
    E2eBounds out;
    // Complete damper pairs contribute Q(h) + P(h+1); the last node is an
    // incomplete pair and contributes its queuing bound only.
    for (size_t h = 0; h + 1 < nodes.size(); ++h) {
        out.delay_ns += inst.nodes[nodes[h]].queuing_bound_ns;
        out.delay_ns += inst.nodes[nodes[h + 1]].processing_ns;
    }
    out.delay_ns += inst.nodes[nodes.back()].queuing_bound_ns;
    out.delay_ns += shaping_ns;
    out.jitter_ns = inst.nodes[nodes.back()].queuing_bound_ns;
    return out;
}

ValidationReport validate_instance(const NetworkInstance& inst) {
    ValidationReport rep;
    auto err = [&rep](const std::string& where, const std::string& msg) {
        rep.errors.push_back({where, msg});
    };
    if (inst.cycle.cycle_ns <= 0) err("cycle", "T must be positive");
    if (inst.cycle.hypercycle < 1) err("cycle", "HC must be at least 1");
    if (inst.cycle.queues_per_port < 3) err("cycle", "N must be at least 3");

    std::set<NodeId> seen;
    for (const NodeSpec& n : inst.nodes) {
        if (!seen.insert(n.id).second) err("node " + n.id, "duplicate node id");
        if (n.queuing_bound_ns <= 0) err("node " + n.id, "queuing bound Q must be positive");
        if (n.processing_ns < 0) err("node " + n.id, "processing bound P must be non-negative");
        if (n.buffer_bytes <= 0) err("node " + n.id, "buffer capacity must be positive");
    }
    std::set<std::pair<NodeId, NodeId>> arc_seen;
    for (const ArcSpec& a : inst.arcs) {
        std::string where = "arc " + a.tail + "->" + a.head;
        if (a.tail == a.head) err(where, "self-loop");
        if (!arc_seen.insert({a.tail, a.head}).second) err(where, "duplicate arc");
        if (seen.find(a.tail) == seen.end()) err(where, "tail references missing node");
        if (seen.find(a.head) == seen.end()) err(where, "head references missing node");
        if (a.prop_ns < 0) err(where, "propagation delay must be non-negative");
        if (a.capacity_bytes_per_cycle <= 0) err(where, "link capacity must be positive");
    }
    return rep;
}

ValidationReport validate_flows(const NetworkInstance& inst, const std::vector<FlowSpec>& flows) {
    ValidationReport rep;
    auto err = [&rep](const std::string& where, const std::string& msg) {
        rep.errors.push_back({where, msg});
    };
    std::set<std::string> ids;
    for (const FlowSpec& f : flows) {
        std::string where = "flow " + f.id;
        if (!ids.insert(f.id).second) err(where, "duplicate flow id");
        if (f.src == f.dst) err(where, "source equals destination");
        if (!inst.find_node(f.src)) err(where, "source references missing node");
        if (!inst.find_node(f.dst)) err(where, "destination references missing node");
        if (f.burst_bytes <= 0) err(where, "burst must be positive");
        if (f.rate_bps <= 0) err(where, "rate must be positive");
        if (f.throughput_bps <= 0) err(where, "throughput must be positive");
        if (f.deadline_ns <= 0) err(where, "deadline must be positive");
        if (f.packet_bytes <= 0) err(where, "packet size must be positive");
        for (const TransmissionPattern& p : f.patterns) {
            if (p.period_cycles < 1 || inst.cycle.hypercycle % p.period_cycles != 0) {
                err(where, "pattern period must divide the hypercycle");
            }
            if (p.chunk_bytes < f.packet_bytes) {
                err(where, "pattern chunk smaller than packet size");
            }
        }
    }
    return rep;
}

std::vector<TransmissionPattern> build_pattern_catalog(const FlowSpec& flow,
                                                       const CycleConfig& cycle,
                                                       Nanoseconds min_path_delay_ns) {
    std::vector<TransmissionPattern> out;
    if (min_path_delay_ns < 0) return out;  // unreachable destination
    for (int m = 1; m <= cycle.hypercycle; ++m) {
        if (cycle.hypercycle % m != 0) continue;
        // Smallest multiple of the packet size able to carry r over m cycles.
        // bits over the period, rounded up to whole bytes.
        std::int64_t period_bits = flow.rate_bps * (cycle.cycle_ns * m);
        Bytes need = ceil_div(period_bits, std::int64_t{8} * 1'000'000'000);
        Bytes chunk = ceil_div(std::max<Bytes>(need, 1), flow.packet_bytes) * flow.packet_bytes;
        TransmissionPattern pat{m, chunk};
        if (min_path_delay_ns + shaping_delay(flow, pat, cycle) <= flow.deadline_ns) {
            out.push_back(pat);
        }
    }
    return out;
}

std::optional<std::vector<int>> min_delay_path(const NetworkInstance& inst, const NodeId& src,
                                               const NodeId& dst) {
    auto s = inst.node_index.find(src);
    auto t = inst.node_index.find(dst);
    if (s == inst.node_index.end() || t == inst.node_index.end()) return std::nullopt;

    const int n = static_cast<int>(inst.nodes.size());
    std::vector<Nanoseconds> dist(n, std::numeric_limits<Nanoseconds>::max());
    std::vector<int> via_arc(n, -1);
    std::vector<std::vector<int>> out_arcs(n);
    for (int a = 0; a < static_cast<int>(inst.arcs.size()); ++a) {
        out_arcs[inst.node_index.at(inst.arcs[a].tail)].push_back(a);
    }
    using Item = std::pair<Nanoseconds, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s->second] = 0;
    pq.push({0, s->second});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d != dist[u]) continue;
        for (int a : out_arcs[u]) {
            int v = inst.node_index.at(inst.arcs[a].head);
            Nanoseconds nd = d + arc_delay(inst, a);
            if (nd < dist[v]) {
                dist[v] = nd;
                via_arc[v] = a;
                pq.push({nd, v});
            }
        }
    }
    if (dist[t->second] == std::numeric_limits<Nanoseconds>::max()) return std::nullopt;
    std::vector<int> path;
    for (int v = t->second; v != s->second;) {
        int a = via_arc[v];
        path.push_back(a);
        v = inst.node_index.at(inst.arcs[a].tail);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

} // namespace dldn
