#include "dldn/ospf.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace dldn {

std::vector<double> ospf_weights(const NetworkInstance& inst, const OspfConfig& cfg) {
    std::vector<double> w(inst.arcs.size(), 0.0);
    for (size_t a = 0; a < inst.arcs.size(); ++a) {
        if (inst.arcs[a].capacity_bytes_per_cycle <= 0) {
            throw std::invalid_argument("ospf_weights: non-positive capacity");
        }
        w[a] = cfg.weight_constant /
               (8.0 * static_cast<double>(inst.arcs[a].capacity_bytes_per_cycle));
    }
    return w;
}

namespace {

std::optional<std::vector<int>> dijkstra_weighted(const NetworkInstance& inst,
                                                  const std::vector<double>& weights,
                                                  const NodeId& src, const NodeId& dst) {
    auto s = inst.node_index.find(src);
    auto t = inst.node_index.find(dst);
    if (s == inst.node_index.end() || t == inst.node_index.end()) return std::nullopt;
    const int n = static_cast<int>(inst.nodes.size());
    std::vector<std::vector<int>> out_arcs(n);
    for (int a = 0; a < static_cast<int>(inst.arcs.size()); ++a) {
        out_arcs[inst.node_index.at(inst.arcs[a].tail)].push_back(a);
    }
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> via(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s->second] = 0.0;
    pq.push({0.0, s->second});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d != dist[u]) continue;
        for (int a : out_arcs[u]) {
            int v = inst.node_index.at(inst.arcs[a].head);
            double nd = d + weights[a];
            if (nd < dist[v]) {
                dist[v] = nd;
                via[v] = a;
                pq.push({nd, v});
            }
        }
    }
    if (via[t->second] < 0 && t->second != s->second) return std::nullopt;
    std::vector<int> path;
    for (int v = t->second; v != s->second;) {
        path.push_back(via[v]);
        v = inst.node_index.at(inst.arcs[via[v]].tail);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// Smallest-beta pattern whose shaping delay keeps the path inside the
// deadline; catalog order breaks ties.
std::optional<int> pick_pattern(const NetworkInstance& inst, const FlowSpec& f,
                                Nanoseconds path_delay_ns) {
    std::optional<int> best;
    Bytes best_beta = 0;
    for (size_t k = 0; k < f.patterns.size(); ++k) {
        Nanoseconds total = path_delay_ns + shaping_delay(f, f.patterns[k], inst.cycle);
        if (total > f.deadline_ns) continue;
        Bytes beta = max_reservation(f.patterns[k]);
        if (!best || beta < best_beta) {
            best = static_cast<int>(k);
            best_beta = beta;
        }
    }
    return best;
}

} // namespace

std::optional<Column> ospf_candidate_column(const NetworkInstance& inst,
                                            const std::vector<FlowSpec>& flows, int flow_index,
                                            const OspfConfig& cfg) {
    const FlowSpec& f = flows.at(flow_index);
    if (f.patterns.empty()) return std::nullopt;
    std::vector<double> w = ospf_weights(inst, cfg);
    auto path = dijkstra_weighted(inst, w, f.src, f.dst);
    if (!path) return std::nullopt;
    auto k = pick_pattern(inst, f, path_delay(inst, *path));
    if (!k) return std::nullopt;
    auto pp = path_feasibility(inst, f, *k, *path);
    if (!pp) return std::nullopt;
    return Column{flow_index, std::move(*pp)};
}

AdmissionSolution ospf_admit(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                             const OspfConfig& cfg) {
    AdmissionSolution sol;
    sol.algorithm = "ospf";
    sol.flows.resize(flows.size());

    std::vector<Bytes> arc_residual(inst.arcs.size());
    std::vector<Bytes> node_residual(inst.nodes.size());
    for (size_t a = 0; a < inst.arcs.size(); ++a) {
        arc_residual[a] = inst.arcs[a].capacity_bytes_per_cycle;
    }
    for (size_t v = 0; v < inst.nodes.size(); ++v) node_residual[v] = inst.nodes[v].buffer_bytes;

    std::vector<double> w = ospf_weights(inst, cfg);
    BitsPerSecond th = 0;
    for (size_t fi = 0; fi < flows.size(); ++fi) {
        const FlowSpec& f = flows[fi];
        FlowDecision& d = sol.flows[fi];
        d.flow_id = f.id;
        d.accepted = false;
        if (f.patterns.empty()) continue;
        auto path = dijkstra_weighted(inst, w, f.src, f.dst);
        if (!path) continue;
        auto k = pick_pattern(inst, f, path_delay(inst, *path));
        if (!k) continue;
        Bytes beta = max_reservation(f.patterns[*k]);

        std::vector<int> nodes = path_nodes(inst, *path);
        bool fits = true;
        for (int a : *path) fits = fits && arc_residual[a] >= beta;
        for (int v : nodes) fits = fits && node_residual[v] >= beta;
        if (!fits) continue;
        for (int a : *path) arc_residual[a] -= beta;
        for (int v : nodes) node_residual[v] -= beta;

        d.accepted = true;
        d.pattern = f.patterns[*k];
        for (int v : nodes) d.path.push_back(inst.nodes[v].id);
        th += f.throughput_bps;
    }
    sol.accepted_throughput_bps = th;
    return sol;
}

std::optional<double> throughput_gap(const AdmissionSolution& cgx, const AdmissionSolution& ospf) {
    if (ospf.accepted_throughput_bps <= 0) return std::nullopt;
    return static_cast<double>(cgx.accepted_throughput_bps) /
           static_cast<double>(ospf.accepted_throughput_bps) * 100.0;
}

} // namespace dldn
