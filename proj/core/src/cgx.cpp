#include "dldn/cgx.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "dldn/ospf.hpp"

namespace dldn {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(Clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

std::string column_key(const Column& c) {
    std::string key = std::to_string(c.flow_index) + "|" +
                      std::to_string(c.path_pattern.pattern_index) + "|";
    for (int a : c.path_pattern.arcs) {
        key += std::to_string(a);
        key += ',';
    }
    return key;
}

} // namespace

LinearProgram build_master(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                           const std::vector<Column>& columns) {
    const int F = static_cast<int>(flows.size());
    const int A = static_cast<int>(inst.arcs.size());
    const int V = static_cast<int>(inst.nodes.size());
    LinearProgram lp;
    lp.rhs.reserve(F + A + V);
    for (const FlowSpec& f : flows) lp.add_row("flow:" + f.id, 1.0);
    for (const ArcSpec& a : inst.arcs) {
        lp.add_row("arc:" + a.tail + ">" + a.head,
                   static_cast<double>(a.capacity_bytes_per_cycle));
    }
    for (const NodeSpec& n : inst.nodes) {
        lp.add_row("node:" + n.id, static_cast<double>(n.buffer_bytes));
    }

    std::set<std::string> seen;
    for (const Column& c : columns) {
        if (!seen.insert(column_key(c)).second) continue;  // duplicate column
        const FlowSpec& f = flows.at(c.flow_index);
        LpColumn col;
        col.label = f.id + "#" + std::to_string(c.path_pattern.pattern_index);
        col.objective = static_cast<double>(f.throughput_bps);
        col.binary = true;
        double beta = static_cast<double>(c.path_pattern.beta_bytes);
        col.entries.push_back({c.flow_index, 1.0});
        for (int a : c.path_pattern.arcs) col.entries.push_back({F + a, beta});
        for (int v : path_nodes(inst, c.path_pattern.arcs)) {
            col.entries.push_back({F + A + v, beta});
        }
        lp.add_column(std::move(col));
    }
    return lp;
}

std::optional<CspResult> csp_shortest_path(const NetworkInstance& inst,
                                           const std::vector<double>& arc_cost,
                                           const std::vector<Nanoseconds>& arc_delay_ns,
                                           Nanoseconds budget_ns, const NodeId& src,
                                           const NodeId& dst) {
    const int n = static_cast<int>(inst.nodes.size());
    if (static_cast<int>(arc_cost.size()) != static_cast<int>(inst.arcs.size()) ||
        arc_cost.size() != arc_delay_ns.size()) {
        throw std::invalid_argument("csp_shortest_path: cost/delay size mismatch");
    }
    for (size_t a = 0; a < arc_cost.size(); ++a) {
        if (arc_cost[a] < 0) throw std::invalid_argument("csp_shortest_path: negative cost");
        if (arc_delay_ns[a] <= 0) throw std::invalid_argument("csp_shortest_path: delay must be positive");
    }
    auto s = inst.node_index.find(src);
    auto t = inst.node_index.find(dst);
    if (s == inst.node_index.end() || t == inst.node_index.end()) return std::nullopt;

    std::vector<std::vector<int>> out_arcs(n);
    for (int a = 0; a < static_cast<int>(inst.arcs.size()); ++a) {
        out_arcs[inst.node_index.at(inst.arcs[a].tail)].push_back(a);
    }

    struct Label {
        double cost;
        Nanoseconds delay;
        int node;
        int via_arc;
        int parent;
    };
    struct QItem {
        double cost;
        Nanoseconds delay;
        int node;
        int label;
        bool operator>(const QItem& o) const {
            if (cost != o.cost) return cost > o.cost;
            if (delay != o.delay) return delay > o.delay;
            if (node != o.node) return node > o.node;
            return label > o.label;
        }
    };

    std::vector<Label> labels;
    std::priority_queue<QItem, std::vector<QItem>, std::greater<>> pq;
    // Labels pop in (cost, delay) order, so at each node the accepted delays
    // strictly decrease; one value per node suffices for dominance.
    std::vector<Nanoseconds> best_delay(n, std::numeric_limits<Nanoseconds>::max());

    labels.push_back({0.0, 0, s->second, -1, -1});
    pq.push({0.0, 0, s->second, 0});
    while (!pq.empty()) {
        QItem it = pq.top();
        pq.pop();
        if (it.delay >= best_delay[it.node]) continue;  // dominated
        best_delay[it.node] = it.delay;
        if (it.node == t->second) {
            CspResult res;
            res.cost = it.cost;
            res.delay_ns = it.delay;
            for (int l = it.label; labels[l].via_arc >= 0; l = labels[l].parent) {
                res.arcs.push_back(labels[l].via_arc);
            }
            std::reverse(res.arcs.begin(), res.arcs.end());
            return res;
        }
        for (int a : out_arcs[it.node]) {
            Nanoseconds nd = it.delay + arc_delay_ns[a];
            if (nd > budget_ns) continue;
            int v = inst.node_index.at(inst.arcs[a].head);
            if (nd >= best_delay[v]) continue;
            labels.push_back({it.cost + arc_cost[a], nd, v, a, it.label});
            pq.push({it.cost + arc_cost[a], nd, v, static_cast<int>(labels.size()) - 1});
        }
    }
    return std::nullopt;
}

namespace {

// One label-setting pass serves every pattern of the flow: collect the Pareto
// frontier at the destination up to the loosest budget, then each pattern
// keeps the cheapest point inside its own budget.
std::vector<Column> price_flow(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                               int flow_index, const DualValues& duals) {
    std::vector<Column> out;
    const FlowSpec& f = flows[flow_index];
    if (f.patterns.empty()) return out;

    std::vector<double> cost(inst.arcs.size(), 0.0);
    std::vector<Nanoseconds> delay(inst.arcs.size(), 0);
    for (size_t a = 0; a < inst.arcs.size(); ++a) {
        int head = inst.node_index.at(inst.arcs[a].head);
        cost[a] = std::max(0.0, duals.mu[a]) + std::max(0.0, duals.omega[head]);
        delay[a] = arc_delay(inst, static_cast<int>(a));
    }

    std::vector<Nanoseconds> budgets(f.patterns.size());
    Nanoseconds max_budget = -1;
    for (size_t k = 0; k < f.patterns.size(); ++k) {
        budgets[k] = f.deadline_ns - shaping_delay(f, f.patterns[k], inst.cycle);
        max_budget = std::max(max_budget, budgets[k]);
    }
    if (max_budget < 0) return out;

    // Frontier at dst: (cost asc, delay desc) with paths.
    struct Point {
        double cost;
        Nanoseconds delay;
        std::vector<int> arcs;
    };
    std::vector<Point> frontier;
    {
        // Re-run of csp_shortest_path that keeps all destination labels.
        const int n = static_cast<int>(inst.nodes.size());
        std::vector<std::vector<int>> out_arcs(n);
        for (int a = 0; a < static_cast<int>(inst.arcs.size()); ++a) {
            out_arcs[inst.node_index.at(inst.arcs[a].tail)].push_back(a);
        }
        struct Label {
            double cost;
            Nanoseconds delay;
            int node;
            int via_arc;
            int parent;
        };
        struct QItem {
            double cost;
            Nanoseconds delay;
            int node;
            int label;
            bool operator>(const QItem& o) const {
                if (cost != o.cost) return cost > o.cost;
                if (delay != o.delay) return delay > o.delay;
                if (node != o.node) return node > o.node;
                return label > o.label;
            }
        };
        int s = inst.node_index.at(f.src);
        int t = inst.node_index.at(f.dst);
        std::vector<Label> labels;
        std::priority_queue<QItem, std::vector<QItem>, std::greater<>> pq;
        std::vector<Nanoseconds> best_delay(n, std::numeric_limits<Nanoseconds>::max());
        labels.push_back({0.0, 0, s, -1, -1});
        pq.push({0.0, 0, s, 0});
        while (!pq.empty()) {
            QItem it = pq.top();
            pq.pop();
            if (it.delay >= best_delay[it.node]) continue;
            best_delay[it.node] = it.delay;
            if (it.node == t) {
                Point p;
                p.cost = it.cost;
                p.delay = it.delay;
                for (int l = it.label; labels[l].via_arc >= 0; l = labels[l].parent) {
                    p.arcs.push_back(labels[l].via_arc);
                }
                std::reverse(p.arcs.begin(), p.arcs.end());
                frontier.push_back(std::move(p));
                continue;  // keep searching for cheaper-delay points
            }
            for (int a : out_arcs[it.node]) {
                Nanoseconds nd = it.delay + delay[a];
                if (nd > max_budget) continue;
                int v = inst.node_index.at(inst.arcs[a].head);
                if (nd >= best_delay[v]) continue;
                labels.push_back({it.cost + cost[a], nd, v, a, it.label});
                pq.push({it.cost + cost[a], nd, v, static_cast<int>(labels.size()) - 1});
            }
        }
    }
    if (frontier.empty()) return out;

    double r = static_cast<double>(f.throughput_bps);
    double lambda = duals.lambda[flow_index];
    double omega_src = duals.omega[inst.node_index.at(f.src)];
    double eps_price = 1e-6 * r;
    for (size_t k = 0; k < f.patterns.size(); ++k) {
        const Point* pick = nullptr;
        for (const Point& p : frontier) {  // acceptance order = cost ascending
            if (p.delay <= budgets[k]) {
                pick = &p;
                break;
            }
        }
        if (!pick) continue;
        double beta = static_cast<double>(max_reservation(f.patterns[k]));
        double lhs = beta * pick->cost;
        double rhs = r - (lambda + beta * omega_src);
        if (lhs < rhs - eps_price) {
            auto pp = path_feasibility(inst, f, static_cast<int>(k), pick->arcs);
            if (pp) out.push_back({flow_index, std::move(*pp)});
        }
    }
    return out;
}

} // namespace

std::optional<Column> pricing(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                              int flow_index, int pattern_index, const DualValues& duals) {
    const FlowSpec& f = flows.at(flow_index);
    const TransmissionPattern& pat = f.patterns.at(pattern_index);
    Nanoseconds budget = f.deadline_ns - shaping_delay(f, pat, inst.cycle);
    if (budget < 0) return std::nullopt;

    std::vector<double> cost(inst.arcs.size(), 0.0);
    std::vector<Nanoseconds> delay(inst.arcs.size(), 0);
    for (size_t a = 0; a < inst.arcs.size(); ++a) {
        int head = inst.node_index.at(inst.arcs[a].head);
        cost[a] = std::max(0.0, duals.mu[a]) + std::max(0.0, duals.omega[head]);
        delay[a] = arc_delay(inst, static_cast<int>(a));
    }
    auto res = csp_shortest_path(inst, cost, delay, budget, f.src, f.dst);
    if (!res) return std::nullopt;

    double r = static_cast<double>(f.throughput_bps);
    double beta = static_cast<double>(max_reservation(pat));
    double lambda = duals.lambda[flow_index];
    double omega_src = duals.omega[inst.node_index.at(f.src)];
    if (beta * res->cost >= r - (lambda + beta * omega_src) - 1e-6 * r) return std::nullopt;
    auto pp = path_feasibility(inst, f, pattern_index, res->arcs);
    if (!pp) return std::nullopt;
    return Column{flow_index, std::move(*pp)};
}

CgState run_cg(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
               const CgOptions& opts) {
    auto t0 = Clock::now();
    CgState state;
    const int F = static_cast<int>(flows.size());
    state.duals.lambda.assign(F, 0.0);
    state.duals.mu.assign(inst.arcs.size(), 0.0);
    state.duals.omega.assign(inst.nodes.size(), 0.0);

    std::set<std::string> pool_keys;
    for (int iter = 0;; ++iter) {
        LinearProgram master = build_master(inst, flows, state.pool);
        LpSolution sol = solve_lp(master);
        if (sol.status != LpStatus::optimal) {
            state.certified = false;
            state.iterations = iter;
            state.log.push_back({iter, 0, state.upper_bound, ms_since(t0)});
            break;
        }
        state.upper_bound = sol.objective;
        for (int f = 0; f < F; ++f) state.duals.lambda[f] = sol.duals[f];
        for (size_t a = 0; a < inst.arcs.size(); ++a) {
            state.duals.mu[a] = sol.duals[F + a];
        }
        for (size_t v = 0; v < inst.nodes.size(); ++v) {
            state.duals.omega[v] = sol.duals[F + inst.arcs.size() + v];
        }

        int added = 0;
        for (int f = 0; f < F; ++f) {
            for (Column& c : price_flow(inst, flows, f, state.duals)) {
                if (pool_keys.insert(column_key(c)).second) {
                    state.pool.push_back(std::move(c));
                    ++added;
                }
            }
        }
        state.log.push_back({iter, added, sol.objective, ms_since(t0)});
        state.iterations = iter + 1;
        if (added == 0) {
            state.certified = true;
            break;
        }
        if (iter + 1 >= opts.max_iterations) break;
        if (ms_since(t0) > static_cast<std::int64_t>(opts.time_limit_s * 1000)) break;
    }
    return state;
}

double optimality_gap(double upper_bound, double integer_objective) {
    if (upper_bound <= 0) return 0.0;
    double gap = (upper_bound - integer_objective) / upper_bound * 100.0;
    return gap < 0 ? 0.0 : gap;
}

std::pair<AdmissionSolution, CgReport> round_ilp(const NetworkInstance& inst,
                                                 const std::vector<FlowSpec>& flows,
                                                 const CgState& cg, const RoundOptions& opts) {
    auto t0 = Clock::now();
    std::vector<Column> pool = cg.pool;
    std::set<std::string> keys;
    for (const Column& c : pool) keys.insert(column_key(c));

    // Baseline columns keep the rounded solution at least as good as OSPF.
    std::vector<std::uint8_t> warm;
    std::vector<std::string> warm_keys;
    if (opts.augment_ospf) {
        AdmissionSolution base = ospf_admit(inst, flows);
        for (int f = 0; f < static_cast<int>(flows.size()); ++f) {
            auto col = ospf_candidate_column(inst, flows, f);
            if (!col) continue;
            std::string key = column_key(*col);
            if (base.flows[f].accepted) warm_keys.push_back(key);
            if (keys.insert(key).second) pool.push_back(std::move(*col));
        }
    }

    LinearProgram master = build_master(inst, flows, pool);
    LpSolution lp = solve_lp(master);
    double ub = cg.upper_bound;
    if (lp.status == LpStatus::optimal) ub = std::max(ub, lp.objective);

    // column_key order must match build_master's dedup order
    std::vector<std::string> master_keys;
    {
        std::set<std::string> seen;
        for (const Column& c : pool) {
            std::string key = column_key(c);
            if (seen.insert(key).second) master_keys.push_back(key);
        }
    }
    warm.assign(master.num_cols(), 0);
    for (const std::string& k : warm_keys) {
        auto it = std::find(master_keys.begin(), master_keys.end(), k);
        if (it != master_keys.end()) warm[it - master_keys.begin()] = 1;
    }

    IntegerSolveResult ip;
    bool integral = lp.status == LpStatus::optimal;
    if (integral) {
        for (double v : lp.primal) {
            if (std::min(v, 1.0 - v) > 1e-6) {
                integral = false;
                break;
            }
        }
    }
    if (integral && lp.status == LpStatus::optimal) {
        ip.status = IpStatus::optimal;
        ip.incumbent.assign(master.num_cols(), 0);
        for (int j = 0; j < master.num_cols(); ++j) ip.incumbent[j] = lp.primal[j] > 0.5 ? 1 : 0;
        ip.objective = 0.0;
        for (int j = 0; j < master.num_cols(); ++j) {
            if (ip.incumbent[j]) ip.objective += master.columns[j].objective;
        }
        ip.best_bound = ip.objective;
        ip.has_incumbent = true;
    } else {
        IpOptions io;
        io.time_limit_s = opts.time_limit_s;
        io.warm_start = &warm;
        ip = solve_ip_exact(master, io);
    }

    // Decode: pool order matches master_keys order.
    std::map<std::string, const Column*> by_key;
    for (const Column& c : pool) by_key.emplace(column_key(c), &c);

    AdmissionSolution sol;
    sol.algorithm = "cgx";
    sol.flows.resize(flows.size());
    for (size_t f = 0; f < flows.size(); ++f) {
        sol.flows[f].flow_id = flows[f].id;
        sol.flows[f].accepted = false;
    }
    BitsPerSecond th = 0;
    for (size_t j = 0; j < master_keys.size(); ++j) {
        if (!ip.has_incumbent || !ip.incumbent[j]) continue;
        const Column* c = by_key.at(master_keys[j]);
        FlowDecision& d = sol.flows[c->flow_index];
        d.accepted = true;
        d.pattern = flows[c->flow_index].patterns[c->path_pattern.pattern_index];
        d.path.clear();
        for (int v : path_nodes(inst, c->path_pattern.arcs)) d.path.push_back(inst.nodes[v].id);
        th += flows[c->flow_index].throughput_bps;
    }
    sol.accepted_throughput_bps = th;
    sol.upper_bound_bps = ub;
    sol.gap_percent = optimality_gap(ub, static_cast<double>(th));

    ValidationReport feas = check_admission(inst, flows, sol);
    if (!feas.ok()) {
        throw std::runtime_error("round_ilp produced an infeasible admission: " +
                                 feas.errors.front().message);
    }

    CgReport rep;
    rep.iterations = cg.iterations;
    rep.upper_bound = ub;
    rep.integer_objective = static_cast<double>(th);
    rep.gap_percent = sol.gap_percent;
    rep.wall_ms = ms_since(t0);
    rep.log = cg.log;
    rep.bb_nodes = ip.nodes;
    if (!cg.certified) {
        rep.termination = "time-limit";
    } else if (ip.status == IpStatus::time_limit) {
        rep.termination = "rounding-time-limit";
    } else {
        rep.termination = "certified";
    }
    return {std::move(sol), std::move(rep)};
}

ValidationReport check_admission(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                                 const AdmissionSolution& sol) {
    ValidationReport rep;
    auto err = [&rep](const std::string& where, const std::string& msg) {
        rep.errors.push_back({where, msg});
    };
    if (sol.flows.size() != flows.size()) {
        err("solution", "decision count does not match flow count");
        return rep;
    }
    std::map<int, Bytes> arc_load;
    std::map<int, Bytes> node_load;
    for (size_t f = 0; f < flows.size(); ++f) {
        const FlowDecision& d = sol.flows[f];
        const FlowSpec& spec = flows[f];
        std::string where = "flow " + spec.id;
        if (d.flow_id != spec.id) err(where, "id mismatch in decision order");
        if (!d.accepted) continue;
        if (d.path.size() < 2 || d.path.front() != spec.src || d.path.back() != spec.dst) {
            err(where, "path endpoints do not match flow");
            continue;
        }
        if (d.pattern.period_cycles < 1 ||
            inst.cycle.hypercycle % d.pattern.period_cycles != 0) {
            err(where, "pattern period does not divide hypercycle");
            continue;
        }
        if (d.pattern.chunk_bytes <= 0) {
            err(where, "pattern chunk must be positive");
            continue;
        }
        std::set<NodeId> visited;
        bool ok = true;
        Nanoseconds total = 0;
        for (size_t i = 0; i + 1 < d.path.size(); ++i) {
            const ArcSpec* a = inst.find_arc(d.path[i], d.path[i + 1]);
            if (!a) {
                err(where, "path uses missing arc " + d.path[i] + "->" + d.path[i + 1]);
                ok = false;
                break;
            }
            if (!visited.insert(d.path[i]).second) {
                err(where, "path revisits node " + d.path[i]);
                ok = false;
                break;
            }
            total += arc_delay(inst, inst.arc_index.at({a->tail, a->head}));
        }
        if (!ok) continue;
        if (!visited.insert(d.path.back()).second) {
            err(where, "path revisits node " + d.path.back());
            continue;
        }
        total += shaping_delay(spec, d.pattern, inst.cycle);
        if (total > spec.deadline_ns) {
            err(where, "selected path-pattern misses the deadline");
            continue;
        }
        Bytes beta = max_reservation(d.pattern);
        node_load[inst.node_index.at(d.path.front())] += beta;
        for (size_t i = 0; i + 1 < d.path.size(); ++i) {
            int arc = inst.arc_index.at({d.path[i], d.path[i + 1]});
            arc_load[arc] += beta;
            node_load[inst.node_index.at(d.path[i + 1])] += beta;
        }
    }
    for (auto [a, load] : arc_load) {
        if (load > inst.arcs[a].capacity_bytes_per_cycle) {
            err("arc " + inst.arcs[a].tail + "->" + inst.arcs[a].head, "capacity exceeded");
        }
    }
    for (auto [v, load] : node_load) {
        if (load > inst.nodes[v].buffer_bytes) {
            err("node " + inst.nodes[v].id, "buffer exceeded");
        }
    }
    return rep;
}

std::string solution_to_json(const AdmissionSolution& sol) {
    json j;
    j["format"] = kSolutionFormat;
    j["algorithm"] = sol.algorithm;
    json fs = json::array();
    for (const FlowDecision& d : sol.flows) {
        json f;
        f["id"] = d.flow_id;
        f["status"] = d.accepted ? "accepted" : "rejected";
        if (d.accepted) {
            f["path"] = d.path;
            f["pattern"] = {{"m", d.pattern.period_cycles},
                            {"b_prime_bytes", d.pattern.chunk_bytes}};
        }
        fs.push_back(std::move(f));
    }
    j["flows"] = std::move(fs);
    j["Th_bps"] = sol.accepted_throughput_bps;
    if (sol.algorithm == "cgx") {
        j["UB_bps"] = sol.upper_bound_bps;
        j["gap_percent"] = sol.gap_percent;
    }
    return j.dump(2) + "\n";
}

AdmissionSolution solution_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != kSolutionFormat) {
        throw std::runtime_error("not a " + std::string(kSolutionFormat) + " document");
    }
    AdmissionSolution sol;
    sol.algorithm = j.value("algorithm", "");
    for (const json& f : j.at("flows")) {
        FlowDecision d;
        d.flow_id = f.at("id").get<std::string>();
        d.accepted = f.at("status").get<std::string>() == "accepted";
        if (d.accepted) {
            for (const json& n : f.at("path")) d.path.push_back(n.get<std::string>());
            d.pattern.period_cycles = f.at("pattern").at("m").get<int>();
            d.pattern.chunk_bytes = f.at("pattern").at("b_prime_bytes").get<std::int64_t>();
        }
        sol.flows.push_back(std::move(d));
    }
    sol.accepted_throughput_bps = j.value("Th_bps", std::int64_t{0});
    sol.upper_bound_bps = j.value("UB_bps", 0.0);
    sol.gap_percent = j.value("gap_percent", 0.0);
    return sol;
}

void save_solution_file(const std::string& path, const AdmissionSolution& sol) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << solution_to_json(sol);
}

AdmissionSolution load_solution_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return solution_from_json(ss.str());
}

void save_report_csv(const std::string& path, const CgReport& report) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "iter,columns_added,lp_obj,wall_ms\n";
    char buf[128];
    for (const CgIteration& it : report.log) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.3f,%lld\n", it.iter, it.columns_added,
                      it.lp_objective, static_cast<long long>(it.wall_ms));
        out << buf;
    }
}

} // namespace dldn
