#include "dldn/sim.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "dldn/rng.hpp"

namespace dldn {

using nlohmann::json;

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

} // namespace

Nanoseconds clock_opening(const NodeClock& clock, Nanoseconds cycle_ns, std::int64_t n) {
    if (clock.drift_ppm == 0) return clock.offset_ns + n * cycle_ns;
    __int128 num = static_cast<__int128>(n) * cycle_ns * (1'000'000 + clock.drift_ppm);
    __int128 q = num / 1'000'000;
    if (num % 1'000'000 != 0 && num < 0) --q;
    return clock.offset_ns + static_cast<Nanoseconds>(q);
}

std::int64_t clock_cycle_floor(const NodeClock& clock, Nanoseconds cycle_ns, Nanoseconds t) {
    std::int64_t x = t - clock.offset_ns;
    if (clock.drift_ppm == 0) return floor_div(x, cycle_ns);
    std::int64_t n = floor_div(x, cycle_ns);  // close for small drift; adjust exactly
    while (clock_opening(clock, cycle_ns, n + 1) <= t) ++n;
    while (clock_opening(clock, cycle_ns, n) > t) --n;
    return n;
}

Nanoseconds compute_eligibility(Nanoseconds t_in_ns, Nanoseconds processing_ns,
                                const DamperHeader& header) {
    if (header.q_prev_ns > header.q_bound_prev_ns) {
        throw SimAbort("queuing-bound violation: parent q=" +
                       std::to_string(header.q_prev_ns) + "ns exceeds bound " +
                       std::to_string(header.q_bound_prev_ns) + "ns");
    }
    if (header.q_prev_ns < 0) throw SimAbort("negative queuing delay in damper header");
    return t_in_ns + processing_ns + (header.q_bound_prev_ns - header.q_prev_ns);
}

DamperHeader record_departure(Nanoseconds eligibility_ns, Nanoseconds t_out_ns,
                              Nanoseconds queuing_bound_ns) {
    if (t_out_ns < eligibility_ns) throw SimAbort("departure before eligibility");
    return {t_out_ns - eligibility_ns, queuing_bound_ns};
}

ValidationReport validate_simulation(const NetworkInstance& inst,
                                     const std::vector<FlowSpec>& flows,
                                     const AdmissionSolution& sol) {
    ValidationReport rep;
    auto err = [&rep](const std::string& where, const std::string& msg) {
        rep.errors.push_back({where, msg});
    };
    std::map<std::string, const FlowSpec*> by_id;
    for (const FlowSpec& f : flows) by_id[f.id] = &f;

    // Per-arc sum of chunk sizes: every cycle's admitted load must serialize
    // within T at the arc's per-cycle budget.
    std::map<int, Bytes> chunk_load;
    for (const FlowDecision& d : sol.flows) {
        if (!d.accepted) continue;
        std::string where = "flow " + d.flow_id;
        auto it = by_id.find(d.flow_id);
        if (it == by_id.end()) {
            err(where, "solution references unknown flow");
            continue;
        }
        const FlowSpec& f = *it->second;
        if (d.path.size() < 2 || d.path.front() != f.src || d.path.back() != f.dst) {
            err(where, "path endpoints do not match flow");
            continue;
        }
        bool ok = true;
        for (size_t i = 0; i + 1 < d.path.size() && ok; ++i) {
            if (!inst.find_arc(d.path[i], d.path[i + 1])) {
                err(where, "path uses missing arc " + d.path[i] + "->" + d.path[i + 1]);
                ok = false;
            }
        }
        if (!ok) continue;
        if (d.pattern.chunk_bytes < f.packet_bytes) {
            err(where, "pattern chunk smaller than the flow packet size");
            continue;
        }
        if (d.pattern.period_cycles < 1 ||
            inst.cycle.hypercycle % d.pattern.period_cycles != 0) {
            err(where, "pattern period does not divide the hypercycle");
            continue;
        }
        for (size_t i = 0; i + 1 < d.path.size(); ++i) {
            chunk_load[inst.arc_index.at({d.path[i], d.path[i + 1]})] += d.pattern.chunk_bytes;
        }
    }
    for (auto [a, load] : chunk_load) {
        if (load > inst.arcs[a].capacity_bytes_per_cycle) {
            err("arc " + inst.arcs[a].tail + "->" + inst.arcs[a].head,
                "admitted chunks exceed one cycle of transmission time");
        }
    }
    return rep;
}

namespace {

struct Route {
    std::vector<int> arcs;
    std::vector<int> nodes;
    std::vector<int> ports;  // transmit port per node on the path (HP only)
};

struct SimPacket {
    int flow = -1;     // HP flow index, or -1 for best effort
    int be_flow = -1;
    std::int64_t seq = 0;
    Bytes size = 0;
    Nanoseconds created = 0;
    int hop = 0;
    int route = -1;
    DamperHeader header;
    Nanoseconds t_in = 0;
    Nanoseconds eligibility = 0;
    Nanoseconds hold = 0;
};

struct Port {
    int node = -1;
    int arc = -1;  // -1: virtual delivery port
    Bytes cycle_budget = 1;
    Nanoseconds busy_until = 0;
    std::map<std::int64_t, std::vector<std::uint32_t>> pending;
    std::set<std::int64_t> gates;
    std::deque<std::uint32_t> be_queue;
    Bytes be_bytes = 0;
};

struct IgwState {
    int port = -1;
    int slot = 0;
    std::int64_t cursor_cycle = std::numeric_limits<std::int64_t>::min();
    Bytes cursor_used = 0;
};

enum EvType : int { kBurst = 0, kBeArrival = 1, kGate = 2, kArrival = 3 };

struct Event {
    Nanoseconds time;
    std::uint64_t order;
    int type;
    int a;
    std::int64_t b;
    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        return order > o.order;
    }
};

class Engine {
  public:
    Engine(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
           const AdmissionSolution& sol, const std::vector<BeFlow>& be_flows,
           const SimConfig& cfg)
        : inst_(inst), flows_(flows), be_flows_(be_flows), cfg_(cfg) {
        T_ = inst.cycle.cycle_ns;
        Rng rng(cfg.seed);
        clocks_.resize(inst.nodes.size());
        for (size_t v = 0; v < inst.nodes.size(); ++v) {
            clocks_[v].offset_ns = rng.uniform(0, T_ - 1);
            clocks_[v].drift_ppm =
                cfg.max_drift_ppm == 0
                    ? 0
                    : static_cast<std::int32_t>(rng.uniform(-cfg.max_drift_ppm, cfg.max_drift_ppm));
        }
        node_hp_bytes_.assign(inst.nodes.size(), 0);

        std::map<std::string, const FlowDecision*> decisions;
        for (const FlowDecision& d : sol.flows) decisions[d.flow_id] = &d;
        flow_route_.assign(flows.size(), -1);
        flow_pattern_.resize(flows.size());
        igw_.resize(flows.size());
        for (size_t fi = 0; fi < flows.size(); ++fi) {
            auto it = decisions.find(flows[fi].id);
            if (it == decisions.end() || !it->second->accepted) continue;
            const FlowDecision& d = *it->second;
            Route r;
            for (const NodeId& nid : d.path) r.nodes.push_back(inst.node_index.at(nid));
            for (size_t i = 0; i + 1 < d.path.size(); ++i) {
                r.arcs.push_back(inst.arc_index.at({d.path[i], d.path[i + 1]}));
            }
            for (size_t h = 0; h < r.nodes.size(); ++h) {
                int arc = h < r.arcs.size() ? r.arcs[h] : -1;
                r.ports.push_back(port_for(r.nodes[h], arc));
            }
            flow_route_[fi] = static_cast<int>(routes_.size());
            routes_.push_back(std::move(r));
            flow_pattern_[fi] = d.pattern;

            IgwState st;
            st.port = routes_[flow_route_[fi]].ports[0];
            st.slot = static_cast<int>(hash_str(flows[fi].id.c_str()) %
                                       static_cast<std::uint64_t>(d.pattern.period_cycles));
            igw_[fi] = st;
        }

        // Best-effort routes: fewest hops, deterministic by node order.
        for (const BeFlow& bf : be_flows_) {
            Route r;
            auto path = be_path(bf.src, bf.dst);
            if (!path) {
                be_route_.push_back(-1);
                continue;
            }
            r.arcs = *path;
            r.nodes = path_nodes(inst_, r.arcs);
            for (size_t h = 0; h + 1 < r.nodes.size(); ++h) {
                r.ports.push_back(port_for(r.nodes[h], r.arcs[h]));
            }
            be_route_.push_back(static_cast<int>(routes_.size()));
            routes_.push_back(std::move(r));
        }
    }

    SimResult run() {
        SimResult res;
        res.clocks = clocks_;
        if (cfg_.horizon_ns < 2 * inst_.cycle.hypercycle_ns()) {
            res.warnings.push_back("horizon shorter than two hypercycles; statistics will be thin");
        }
        gen_until_ = cfg_.horizon_ns - std::min<Nanoseconds>(cfg_.horizon_ns / 5, 500'000);

        Rng rng(cfg_.seed ^ 0x0b0e5eedc0ffee11ull);
        flow_start_.assign(flows_.size(), 0);
        for (size_t fi = 0; fi < flows_.size(); ++fi) {
            if (flow_route_[fi] < 0) continue;
            Nanoseconds period = burst_period(flows_[fi]);
            Nanoseconds start = rng.uniform(0, std::max<Nanoseconds>(period - 1, 0));
            flow_start_[fi] = start;
            push(start, kBurst, static_cast<int>(fi), 0);
        }
        for (size_t bi = 0; bi < be_flows_.size(); ++bi) {
            if (be_route_[bi] < 0) continue;
            Nanoseconds period = be_period(be_flows_[bi]);
            push(rng.uniform(0, std::max<Nanoseconds>(period - 1, 0)), kBeArrival,
                 static_cast<int>(bi), 0);
        }

        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            switch (ev.type) {
                case kBurst: on_burst(ev.a, ev.time, ev.b); break;
                case kBeArrival: on_be_arrival(ev.a, ev.time, ev.b); break;
                case kGate: on_gate(ev.a, ev.b); break;
                case kArrival: on_arrival(static_cast<std::uint32_t>(ev.a), ev.time); break;
            }
        }

        finalize(res);
        return res;
    }

  private:
    Nanoseconds opening(int node, std::int64_t n) const {
        return clock_opening(clocks_[node], T_, n);
    }
    std::int64_t cfloor(int node, Nanoseconds t) const {
        return clock_cycle_floor(clocks_[node], T_, t);
    }
    Nanoseconds ser_ns(Bytes size, Bytes budget) const {
        return ceil_div(size * T_, budget);
    }
    Nanoseconds burst_period(const FlowSpec& f) const {
        return ceil_div(f.burst_bytes * 8 * 1'000'000'000, f.rate_bps);
    }
    Nanoseconds be_period(const BeFlow& f) const {
        return ceil_div(f.packet_bytes * 8 * 1'000'000'000, f.rate_bps);
    }

    void push(Nanoseconds time, int type, int a, std::int64_t b) {
        queue_.push({time, order_++, type, a, b});
    }

    int port_for(int node, int arc) {
        auto key = std::make_pair(node, arc);
        auto it = port_index_.find(key);
        if (it != port_index_.end()) return it->second;
        Port p;
        p.node = node;
        p.arc = arc;
        if (arc >= 0) {
            p.cycle_budget = inst_.arcs[arc].capacity_bytes_per_cycle;
        } else {
            Bytes best = 0;
            for (const ArcSpec& a : inst_.arcs) {
                if (inst_.node_index.at(a.head) == node) {
                    best = std::max(best, a.capacity_bytes_per_cycle);
                }
            }
            if (best == 0) {
                for (const ArcSpec& a : inst_.arcs) {
                    if (inst_.node_index.at(a.tail) == node) {
                        best = std::max(best, a.capacity_bytes_per_cycle);
                    }
                }
            }
            p.cycle_budget = std::max<Bytes>(best, 1);
        }
        int idx = static_cast<int>(ports_.size());
        ports_.push_back(std::move(p));
        port_index_[key] = idx;
        return idx;
    }

    std::optional<std::vector<int>> be_path(const NodeId& src, const NodeId& dst) const {
        auto s = inst_.node_index.find(src);
        auto t = inst_.node_index.find(dst);
        if (s == inst_.node_index.end() || t == inst_.node_index.end()) return std::nullopt;
        std::vector<int> via(inst_.nodes.size(), -1);
        std::vector<char> seen(inst_.nodes.size(), 0);
        std::vector<std::vector<int>> out(inst_.nodes.size());
        for (int a = 0; a < static_cast<int>(inst_.arcs.size()); ++a) {
            out[inst_.node_index.at(inst_.arcs[a].tail)].push_back(a);
        }
        std::queue<int> bfs;
        bfs.push(s->second);
        seen[s->second] = 1;
        while (!bfs.empty()) {
            int u = bfs.front();
            bfs.pop();
            for (int a : out[u]) {
                int v = inst_.node_index.at(inst_.arcs[a].head);
                if (seen[v]) continue;
                seen[v] = 1;
                via[v] = a;
                bfs.push(v);
            }
        }
        if (!seen[t->second]) return std::nullopt;
        std::vector<int> path;
        for (int v = t->second; v != s->second;) {
            path.push_back(via[v]);
            v = inst_.node_index.at(inst_.arcs[via[v]].tail);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    void schedule_gate(int port, std::int64_t cycle) {
        Port& p = ports_[port];
        if (!p.gates.insert(cycle).second) return;
        push(opening(p.node, cycle), kGate, port, cycle);
    }

    // Ingress shaping: split the burst into chunks of at most b' bytes and
    // book them on consecutive reservations of the flow's pattern.
    void on_burst(int fi, Nanoseconds t, std::int64_t burst_no) {
        const FlowSpec& f = flows_[fi];
        const Route& r = routes_[flow_route_[fi]];
        IgwState& st = igw_[fi];
        const TransmissionPattern& pat = flow_pattern_[fi];
        int igw_node = r.nodes[0];

        std::int64_t c = cfloor(igw_node, t) + 1;  // first opening strictly after t
        std::int64_t m = pat.period_cycles;
        std::int64_t n = c + (((st.slot - c) % m) + m) % m;
        if (n > st.cursor_cycle) {
            st.cursor_cycle = n;
            st.cursor_used = 0;
        }

        Bytes remaining = f.burst_bytes;
        while (remaining > 0) {
            Bytes size = std::min(remaining, f.packet_bytes);
            remaining -= size;
            if (size > pat.chunk_bytes) {
                faults_.push_back({t, "reservation-overflow",
                                   "flow " + f.id + " packet larger than chunk b'"});
                ++hp_dropped_;
                continue;
            }
            if (st.cursor_used + size > pat.chunk_bytes) {
                st.cursor_cycle += m;
                st.cursor_used = 0;
            }
            if (node_hp_bytes_[igw_node] + size > inst_.nodes[igw_node].buffer_bytes) {
                faults_.push_back({t, "buffer-overflow",
                                   "ingress buffer full at " + inst_.nodes[igw_node].id +
                                       " for flow " + f.id});
                ++hp_dropped_;
                continue;
            }
            st.cursor_used += size;
            node_hp_bytes_[igw_node] += size;

            SimPacket pkt;
            pkt.flow = fi;
            pkt.seq = next_seq_[fi]++;
            pkt.size = size;
            pkt.created = t;
            pkt.hop = 0;
            pkt.route = flow_route_[fi];
            pkt.t_in = t;
            pkt.eligibility = opening(igw_node, st.cursor_cycle);
            pkt.hold = pkt.eligibility - t;
            auto id = static_cast<std::uint32_t>(packets_.size());
            packets_.push_back(pkt);
            ports_[st.port].pending[st.cursor_cycle].push_back(id);
            schedule_gate(st.port, st.cursor_cycle);
        }

        Nanoseconds next = flow_start_[fi] +
                           ceil_div((burst_no + 1) * f.burst_bytes * 8 * 1'000'000'000, f.rate_bps);
        if (next < gen_until_) push(next, kBurst, fi, burst_no + 1);
    }

    void on_be_arrival(int bi, Nanoseconds t, std::int64_t k) {
        const BeFlow& bf = be_flows_[bi];
        SimPacket pkt;
        pkt.be_flow = bi;
        pkt.size = bf.packet_bytes;
        pkt.created = t;
        pkt.hop = 0;
        pkt.route = be_route_[bi];
        auto id = static_cast<std::uint32_t>(packets_.size());
        packets_.push_back(pkt);
        enqueue_be(id, t);

        Nanoseconds next = ceil_div((k + 1) * bf.packet_bytes * 8 * 1'000'000'000, bf.rate_bps);
        if (next < gen_until_) push(next, kBeArrival, bi, k + 1);
    }

    void enqueue_be(std::uint32_t id, Nanoseconds t) {
        SimPacket& pkt = packets_[id];
        const Route& r = routes_[pkt.route];
        if (pkt.hop >= static_cast<int>(r.ports.size())) {
            ++be_delivered_;
            return;
        }
        Port& p = ports_[r.ports[pkt.hop]];
        // unsendable under the guard band: it would never fit any gap
        if (ser_ns(pkt.size, p.cycle_budget) > T_ ||
            p.be_bytes + pkt.size > cfg_.be_queue_bytes) {
            ++be_dropped_;
            return;
        }
        p.be_queue.push_back(id);
        p.be_bytes += pkt.size;
        try_send_be(r.ports[pkt.hop], t);
    }

    // Best effort fills gaps under a guard band: a packet starts only if it
    // finishes before the next gate opening, so reserved traffic is never
    // blocked.
    void try_send_be(int port, Nanoseconds t) {
        Port& p = ports_[port];
        while (!p.be_queue.empty()) {
            Nanoseconds start = std::max(t, p.busy_until);
            std::int64_t c = cfloor(p.node, start);
            if (p.pending.count(c)) {
                schedule_gate(port, c);  // already scheduled; keeps the drain alive
                return;
            }
            std::uint32_t id = p.be_queue.front();
            Nanoseconds fin = start + ser_ns(packets_[id].size, p.cycle_budget);
            if (fin > opening(p.node, c + 1)) {
                schedule_gate(port, c + 1);
                return;
            }
            p.be_queue.pop_front();
            p.be_bytes -= packets_[id].size;
            p.busy_until = fin;
            forward_be(id, fin);
        }
    }

    void forward_be(std::uint32_t id, Nanoseconds t_out) {
        SimPacket& pkt = packets_[id];
        const Route& r = routes_[pkt.route];
        Nanoseconds t_in = t_out + inst_.arcs[r.arcs[pkt.hop]].prop_ns;
        pkt.hop += 1;
        if (pkt.hop >= static_cast<int>(r.arcs.size())) {
            ++be_delivered_;
            return;
        }
        push(t_in, kArrival, static_cast<int>(id), 0);
    }

    void on_gate(int port, std::int64_t cycle) {
        Port& p = ports_[port];
        p.gates.erase(cycle);
        Nanoseconds open = opening(p.node, cycle);
        Nanoseconds next_open = opening(p.node, cycle + 1);
        Nanoseconds txt = std::max(open, p.busy_until);

        auto it = p.pending.find(cycle);
        if (it != p.pending.end()) {
            for (std::uint32_t id : it->second) {
                SimPacket& pkt = packets_[id];
                Nanoseconds t_out = txt + ser_ns(pkt.size, p.cycle_budget);
                txt = t_out;
                if (t_out > next_open) {
                    faults_.push_back({t_out, "cycle-overrun",
                                       "port " + inst_.nodes[p.node].id + " cycle " +
                                           std::to_string(cycle) +
                                           " could not drain within T"});
                }
                node_hp_bytes_[p.node] -= pkt.size;
                Nanoseconds q = t_out - pkt.eligibility;
                trace_.push_back({pkt.flow, pkt.seq, pkt.hop, p.node, pkt.t_in, pkt.eligibility,
                                  t_out, q, pkt.hold});
                const Route& r = routes_[pkt.route];
                if (p.arc < 0) {
                    deliver(pkt, t_out);
                } else {
                    pkt.header =
                        record_departure(pkt.eligibility, t_out,
                                         inst_.nodes[p.node].queuing_bound_ns);
                    pkt.hop += 1;
                    Nanoseconds t_in = t_out + inst_.arcs[r.arcs[pkt.hop - 1]].prop_ns;
                    push(t_in, kArrival, static_cast<int>(id), 0);
                }
            }
            p.pending.erase(it);
            p.busy_until = std::max(p.busy_until, txt);
        }
        try_send_be(port, std::max(open, p.busy_until));
        if (!p.be_queue.empty()) schedule_gate(port, cycle + 1);
    }

    void on_arrival(std::uint32_t id, Nanoseconds t_in) {
        SimPacket& pkt = packets_[id];
        if (pkt.be_flow >= 0) {
            enqueue_be(id, t_in);
            return;
        }
        const Route& r = routes_[pkt.route];
        int v = r.nodes[pkt.hop];
        Nanoseconds eligibility =
            compute_eligibility(t_in, inst_.nodes[v].processing_ns, pkt.header);
        if (node_hp_bytes_[v] + pkt.size > inst_.nodes[v].buffer_bytes) {
            faults_.push_back({t_in, "buffer-overflow",
                               "buffer full at " + inst_.nodes[v].id + " for flow " +
                                   flows_[pkt.flow].id});
            ++hp_dropped_;
            return;
        }
        node_hp_bytes_[v] += pkt.size;
        pkt.t_in = t_in;
        pkt.eligibility = eligibility;
        pkt.hold = eligibility - t_in - inst_.nodes[v].processing_ns;
        int port = r.ports[pkt.hop];
        std::int64_t n = cfloor(v, eligibility) + 1;  // strictly after E
        ports_[port].pending[n].push_back(id);
        schedule_gate(port, n);
    }

    void deliver(SimPacket& pkt, Nanoseconds t_out) {
        ++hp_delivered_;
        Nanoseconds e2e = t_out - pkt.created;
        FlowAcc& acc = acc_[pkt.flow];
        if (acc.count == 0) {
            acc.min = acc.max = e2e;
        } else {
            acc.min = std::min(acc.min, e2e);
            acc.max = std::max(acc.max, e2e);
        }
        acc.sum += e2e;
        acc.count += 1;
    }

    void finalize(SimResult& res) {
        res.trace = std::move(trace_);
        res.faults = std::move(faults_);
        res.hp_delivered = hp_delivered_;
        res.hp_dropped = hp_dropped_;
        res.be_delivered = be_delivered_;
        res.be_dropped = be_dropped_;

        // Packets still sitting in queues at the end of the horizon.
        std::int64_t inflight = 0;
        for (const Port& p : ports_) {
            for (const auto& [c, v] : p.pending) inflight += static_cast<std::int64_t>(v.size());
        }
        res.hp_inflight = inflight;

        // Constant pair delay per flow, re-derived from the recorded trace.
        std::vector<size_t> order(res.trace.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            const TraceRow& x = res.trace[a];
            const TraceRow& y = res.trace[b];
            if (x.flow != y.flow) return x.flow < y.flow;
            if (x.seq != y.seq) return x.seq < y.seq;
            return x.hop < y.hop;
        });
        std::vector<char> pair_ok(flows_.size(), 1);
        for (size_t i = 0; i + 1 < order.size(); ++i) {
            const TraceRow& cur = res.trace[order[i]];
            const TraceRow& nxt = res.trace[order[i + 1]];
            if (cur.flow != nxt.flow || cur.seq != nxt.seq || nxt.hop != cur.hop + 1) continue;
            Nanoseconds lhs = cur.q_ns + inst_.nodes[nxt.node].processing_ns + nxt.d_ns;
            Nanoseconds rhs =
                inst_.nodes[cur.node].queuing_bound_ns + inst_.nodes[nxt.node].processing_ns;
            if (lhs != rhs) pair_ok[cur.flow] = 0;
        }

        for (size_t fi = 0; fi < flows_.size(); ++fi) {
            if (flow_route_[fi] < 0) continue;
            const Route& r = routes_[flow_route_[fi]];
            FlowStats st;
            st.flow_id = flows_[fi].id;
            const FlowAcc& acc = acc_[static_cast<int>(fi)];
            st.packets = acc.count;
            st.min_e2e_ns = acc.count ? acc.min : 0;
            st.max_e2e_ns = acc.count ? acc.max : 0;
            st.mean_e2e_ns = acc.count ? static_cast<double>(acc.sum) / acc.count : 0.0;
            st.jitter_ns = st.max_e2e_ns - st.min_e2e_ns;
            st.bound_ns = inst_.nodes[r.nodes.back()].queuing_bound_ns;
            st.bound_ok = st.jitter_ns <= st.bound_ns;
            st.pair_delay_constant = pair_ok[fi] != 0;
            res.stats.push_back(std::move(st));
        }
    }

    struct FlowAcc {
        std::int64_t count = 0;
        Nanoseconds min = 0, max = 0;
        __int128 sum = 0;
    };

    const NetworkInstance& inst_;
    const std::vector<FlowSpec>& flows_;
    const std::vector<BeFlow>& be_flows_;
    SimConfig cfg_;
    Nanoseconds T_;
    Nanoseconds gen_until_ = 0;
    std::vector<NodeClock> clocks_;
    std::vector<Route> routes_;
    std::vector<int> flow_route_;
    std::vector<TransmissionPattern> flow_pattern_;
    std::vector<int> be_route_;
    std::vector<IgwState> igw_;
    std::vector<Nanoseconds> flow_start_;
    std::map<int, std::int64_t> next_seq_;
    std::vector<Port> ports_;
    std::map<std::pair<int, int>, int> port_index_;
    std::vector<Bytes> node_hp_bytes_;
    std::vector<SimPacket> packets_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t order_ = 0;
    std::vector<TraceRow> trace_;
    std::vector<SimFault> faults_;
    std::map<int, FlowAcc> acc_;
    std::int64_t hp_delivered_ = 0;
    std::int64_t hp_dropped_ = 0;
    std::int64_t be_delivered_ = 0;
    std::int64_t be_dropped_ = 0;
};

} // namespace

SimResult run_simulation(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                         const AdmissionSolution& sol, const std::vector<BeFlow>& be_flows,
                         const SimConfig& config) {
    ValidationReport rep = validate_simulation(inst, flows, sol);
    if (!rep.ok()) {
        throw std::invalid_argument("simulation inputs invalid: " + rep.errors.front().where +
                                    ": " + rep.errors.front().message);
    }
    Engine engine(inst, flows, sol, be_flows, config);
    return engine.run();
}

InvariantReport check_invariants(const SimResult& result, const NetworkInstance& inst,
                                 const std::vector<FlowSpec>& flows) {
    InvariantReport rep;
    Nanoseconds T = inst.cycle.cycle_ns;

    std::vector<size_t> order(result.trace.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const TraceRow& x = result.trace[a];
        const TraceRow& y = result.trace[b];
        if (x.flow != y.flow) return x.flow < y.flow;
        if (x.seq != y.seq) return x.seq < y.seq;
        return x.hop < y.hop;
    });

    auto flow_name = [&flows](int f) {
        return f >= 0 && f < static_cast<int>(flows.size()) ? flows[f].id : std::to_string(f);
    };

    // Constant pair delay and the 2T queuing bound, packet by packet.
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j < order.size() && result.trace[order[j]].flow == result.trace[order[i]].flow &&
               result.trace[order[j]].seq == result.trace[order[i]].seq) {
            ++j;
        }
        ++rep.packets_checked;
        rep.max_hops_seen = std::max<std::int64_t>(rep.max_hops_seen,
                                                   static_cast<std::int64_t>(j - i));
        for (size_t k = i; k < j; ++k) {
            const TraceRow& row = result.trace[order[k]];
            if (row.q_ns > 2 * T) {
                rep.violations.push_back("2T bound: flow " + flow_name(row.flow) + " seq " +
                                         std::to_string(row.seq) + " hop " +
                                         std::to_string(row.hop) + " q=" +
                                         std::to_string(row.q_ns) + "ns");
            }
            if (k + 1 < j) {
                const TraceRow& nxt = result.trace[order[k + 1]];
                if (nxt.hop != row.hop + 1) continue;
                ++rep.pairs_checked;
                Nanoseconds lhs = row.q_ns + inst.nodes[nxt.node].processing_ns + nxt.d_ns;
                Nanoseconds rhs = inst.nodes[row.node].queuing_bound_ns +
                                  inst.nodes[nxt.node].processing_ns;
                if (lhs != rhs) {
                    rep.violations.push_back(
                        "pair delay: flow " + flow_name(row.flow) + " seq " +
                        std::to_string(row.seq) + " pair at hop " + std::to_string(row.hop) +
                        " q+p+d=" + std::to_string(lhs) + " expected " + std::to_string(rhs));
                }
            }
        }
        i = j;
    }

    // Eligibility-gap preservation for packets sent in the same ingress cycle.
    // Rows grouped by (flow, ingress transmission cycle); each group's E gaps
    // must repeat identically at every hop and stay within T.
    std::map<std::pair<int, std::int64_t>, std::vector<size_t>> groups;  // -> first-hop rows
    for (size_t k = 0; k < order.size(); ++k) {
        const TraceRow& row = result.trace[order[k]];
        if (row.hop != 0 || row.flow < 0) continue;
        const NodeClock& clk = result.clocks[row.node];
        std::int64_t cyc = clock_cycle_floor(clk, T, row.t_out_ns - 1);
        groups[{row.flow, cyc}].push_back(k);
    }
    for (const auto& [key, members] : groups) {
        if (members.size() < 2) continue;
        for (size_t a = 0; a + 1 < members.size(); ++a) {
            size_t ka = members[a];
            size_t kb = members[a + 1];
            // Walk both packets hop by hop, comparing E gaps.
            const TraceRow& ra0 = result.trace[order[ka]];
            const TraceRow& rb0 = result.trace[order[kb]];
            Nanoseconds gap0 = ra0.eligibility_ns - rb0.eligibility_ns;
            if (gap0 > T || gap0 < -T) {
                rep.violations.push_back("eligibility gap exceeds T at ingress for flow " +
                                         flow_name(ra0.flow));
            }
            ++rep.same_cycle_pairs;
            for (size_t h = 1;; ++h) {
                size_t ia = ka + h;
                size_t ib = kb + h;
                if (ia >= order.size() || ib >= order.size()) break;
                const TraceRow& ra = result.trace[order[ia]];
                const TraceRow& rb = result.trace[order[ib]];
                if (ra.flow != ra0.flow || ra.seq != ra0.seq) break;
                if (rb.flow != rb0.flow || rb.seq != rb0.seq) break;
                if (ra.hop != static_cast<int>(h) || rb.hop != static_cast<int>(h)) break;
                Nanoseconds gap = ra.eligibility_ns - rb.eligibility_ns;
                if (gap != gap0) {
                    rep.violations.push_back(
                        "eligibility gap drift: flow " + flow_name(ra.flow) + " seqs " +
                        std::to_string(ra0.seq) + "/" + std::to_string(rb0.seq) + " hop " +
                        std::to_string(h) + " gap " + std::to_string(gap) + " vs " +
                        std::to_string(gap0));
                }
            }
        }
    }
    return rep;
}

std::vector<BeFlow> traffic_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != kTrafficFormat) {
        throw std::runtime_error("not a " + std::string(kTrafficFormat) + " document");
    }
    std::vector<BeFlow> out;
    for (const json& f : j.at("flows")) {
        BeFlow b;
        b.src = f.at("src").get<std::string>();
        b.dst = f.at("dst").get<std::string>();
        b.rate_bps = f.at("rate_bps").get<std::int64_t>();
        b.packet_bytes = f.at("packet_bytes").get<std::int64_t>();
        out.push_back(std::move(b));
    }
    return out;
}

std::string traffic_to_json(const std::vector<BeFlow>& flows) {
    json j;
    j["format"] = kTrafficFormat;
    json fs = json::array();
    for (const BeFlow& f : flows) {
        fs.push_back({{"src", f.src},
                      {"dst", f.dst},
                      {"rate_bps", f.rate_bps},
                      {"packet_bytes", f.packet_bytes}});
    }
    j["flows"] = std::move(fs);
    return j.dump(2) + "\n";
}

std::vector<BeFlow> load_traffic_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return traffic_from_json(ss.str());
}

void save_traffic_file(const std::string& path, const std::vector<BeFlow>& flows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << traffic_to_json(flows);
}

void save_trace_csv(const std::string& path, const SimResult& result,
                    const NetworkInstance& inst, const std::vector<FlowSpec>& flows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "flow,seq,hop,node,t_in_ns,E_ns,t_out_ns,q_ns,d_ns\n";
    char buf[256];
    for (const TraceRow& r : result.trace) {
        std::snprintf(buf, sizeof(buf), "%s,%lld,%d,%s,%lld,%lld,%lld,%lld,%lld\n",
                      flows[r.flow].id.c_str(), static_cast<long long>(r.seq), r.hop,
                      inst.nodes[r.node].id.c_str(), static_cast<long long>(r.t_in_ns),
                      static_cast<long long>(r.eligibility_ns),
                      static_cast<long long>(r.t_out_ns), static_cast<long long>(r.q_ns),
                      static_cast<long long>(r.d_ns));
        out << buf;
    }
}

void save_stats_csv(const std::string& path, const SimResult& result) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "flow,packets,min_e2e_ns,max_e2e_ns,mean_e2e_ns,jitter_ns,bound_ns,ok\n";
    char buf[256];
    for (const FlowStats& s : result.stats) {
        std::snprintf(buf, sizeof(buf), "%s,%lld,%lld,%lld,%.3f,%lld,%lld,%d\n",
                      s.flow_id.c_str(), static_cast<long long>(s.packets),
                      static_cast<long long>(s.min_e2e_ns), static_cast<long long>(s.max_e2e_ns),
                      s.mean_e2e_ns, static_cast<long long>(s.jitter_ns),
                      static_cast<long long>(s.bound_ns), s.bound_ok ? 1 : 0);
        out << buf;
    }
}

} // namespace dldn
