#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "dldn/cgx.hpp"
#include "dldn/instance_io.hpp"
#include "dldn/ospf.hpp"
#include "dldn/rng.hpp"

namespace dldn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int cmd_generate(const GenerateArgs& args) {
    NetworkInstance inst;
    std::vector<FlowSpec> flows;
    try {
        inst = generate_topology(args.spec);
        flows = generate_flows(args.spec, inst);
    } catch (const GenError& e) {
        std::cerr << "generate: " << e.what() << "\n";
        return kExitUsage;
    }
    ValidationReport rep = validate_instance(inst);
    if (!rep.ok()) {
        std::cerr << "generate: produced invalid instance: " << rep.errors.front().message << "\n";
        return kExitUsage;
    }
    save_instance_file(args.out_instance, inst);
    save_flows_file(args.out_flows, flows);
    std::cout << "wrote " << args.out_instance << " (" << inst.nodes.size() << " nodes, "
              << inst.arcs.size() << " arcs) and " << args.out_flows << " (" << flows.size()
              << " flows)\n";
    return kExitOk;
}

namespace {

struct LoadedProblem {
    NetworkInstance instance;
    std::vector<FlowSpec> flows;
};

LoadedProblem load_problem(const std::string& instance_path, const std::string& flows_path) {
    InstanceFile file = load_instance_file(instance_path);
    LoadedProblem p;
    p.instance = std::move(file.instance);
    p.flows = std::move(file.flows);
    if (!flows_path.empty()) p.flows = load_flows_file(flows_path);
    ValidationReport rep = validate_instance(p.instance);
    if (!rep.ok()) {
        throw std::runtime_error("instance invalid: " + rep.errors.front().where + ": " +
                                 rep.errors.front().message);
    }
    rep = validate_flows(p.instance, p.flows);
    if (!rep.ok()) {
        throw std::runtime_error("flows invalid: " + rep.errors.front().where + ": " +
                                 rep.errors.front().message);
    }
    return p;
}

} // namespace

int cmd_admit(const AdmitArgs& args) {
    LoadedProblem p;
    try {
        p = load_problem(args.instance_path, args.flows_path);
    } catch (const std::exception& e) {
        std::cerr << "admit: " << e.what() << "\n";
        return kExitUsage;
    }
    attach_pattern_catalogs(p.instance, p.flows);

    if (args.algorithm == "ospf") {
        AdmissionSolution sol = ospf_admit(p.instance, p.flows);
        save_solution_file(args.out_solution, sol);
        CgReport empty;
        save_report_csv(args.out_report, empty);
        std::cout << "ospf Th=" << sol.accepted_throughput_bps << " bps\n";
        return kExitOk;
    }
    if (args.algorithm != "cgx") {
        std::cerr << "admit: unknown algorithm '" << args.algorithm << "'\n";
        return kExitUsage;
    }

    CgOptions cg_opts;
    cg_opts.time_limit_s = args.time_limit_s * args.cg_share;
    CgState cg = run_cg(p.instance, p.flows, cg_opts);
    if (!args.dump_mps.empty()) {
        std::ofstream mps(args.dump_mps, std::ios::binary | std::ios::trunc);
        LinearProgram master = build_master(p.instance, p.flows, cg.pool);
        write_mps(master, mps, "DLDN_MASTER");
    }
    RoundOptions round_opts;
    round_opts.time_limit_s = args.time_limit_s * (1.0 - args.cg_share);
    auto [sol, report] = round_ilp(p.instance, p.flows, cg, round_opts);
    save_solution_file(args.out_solution, sol);
    save_report_csv(args.out_report, report);
    std::printf("cgx Th=%lld bps UB=%.0f bps gap=%.4f%% (%s, %d iterations)\n",
                static_cast<long long>(sol.accepted_throughput_bps), sol.upper_bound_bps,
                sol.gap_percent, report.termination.c_str(), report.iterations);
    if (sol.accepted_throughput_bps == 0 && report.termination != "certified" &&
        report.upper_bound > 0) {
        return kExitNoIncumbent;
    }
    return kExitOk;
}

int cmd_simulate(const SimulateArgs& args) {
    SimulateArgs a = args;
    if (!a.bundle.empty()) {
        if (a.bundle != "sec5a") {
            std::cerr << "simulate: unknown bundle '" << a.bundle << "'\n";
            return kExitUsage;
        }
        BundleFiles files = write_sec5a_bundle(a.out_dir);
        a.instance_path = files.instance;
        a.flows_path = files.flows;
        a.solution_path = files.solution;
        a.traffic_path = files.traffic;
    }

    LoadedProblem p;
    AdmissionSolution sol;
    std::vector<BeFlow> be;
    try {
        p = load_problem(a.instance_path, a.flows_path);
        sol = load_solution_file(a.solution_path);
        if (!a.traffic_path.empty()) be = load_traffic_file(a.traffic_path);
        ValidationReport rep = validate_simulation(p.instance, p.flows, sol);
        if (!rep.ok()) {
            std::cerr << "simulate: " << rep.errors.front().where << ": "
                      << rep.errors.front().message << "\n";
            return kExitUsage;
        }
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return kExitUsage;
    }

    SimConfig cfg;
    cfg.horizon_ns = us_to_ns(a.horizon_us);
    cfg.seed = a.seed;
    SimResult res;
    try {
        res = run_simulation(p.instance, p.flows, sol, be, cfg);
    } catch (const SimAbort& e) {
        std::cerr << "simulate: aborted: " << e.what() << "\n";
        return kExitBoundViolated;
    }
    for (const std::string& w : res.warnings) std::cerr << "simulate: warning: " << w << "\n";

    fs::path dir(a.out_dir);
    fs::create_directories(dir);
    std::string trace_path = (dir / a.out_trace).string();
    std::string stats_path = (dir / a.out_stats).string();
    save_trace_csv(trace_path, res, p.instance, p.flows);
    save_stats_csv(stats_path, res);

    InvariantReport inv = check_invariants(res, p.instance, p.flows);
    bool bounds_ok = res.faults.empty() && inv.ok();
    for (const FlowStats& s : res.stats) bounds_ok = bounds_ok && s.bound_ok;

    std::printf("simulated %lld packets (%lld in flight, %lld dropped), %lld be packets\n",
                static_cast<long long>(res.hp_delivered), static_cast<long long>(res.hp_inflight),
                static_cast<long long>(res.hp_dropped), static_cast<long long>(res.be_delivered));
    for (const FlowStats& s : res.stats) {
        std::printf("flow %s: %lld packets jitter=%lldns bound=%lldns %s\n", s.flow_id.c_str(),
                    static_cast<long long>(s.packets), static_cast<long long>(s.jitter_ns),
                    static_cast<long long>(s.bound_ns), s.bound_ok ? "ok" : "VIOLATED");
    }
    if (!res.faults.empty()) {
        std::printf("%zu faults (first: %s)\n", res.faults.size(),
                    res.faults.front().detail.c_str());
    }
    if (!inv.ok()) {
        std::printf("%zu invariant violations (first: %s)\n", inv.violations.size(),
                    inv.violations.front().c_str());
    }
    std::printf("wrote %s and %s\n", trace_path.c_str(), stats_path.c_str());
    return bounds_ok ? kExitOk : kExitBoundViolated;
}

BundleFiles write_sec5a_bundle(const std::string& dir) {
    fs::create_directories(dir);
    // Five flows on 10 Gb/s ports, per-hop queuing bound 5 us. The cycle is
    // 2.5 us so the two-cycle worst case meets the bound exactly.
    NetworkInstance inst;
    inst.cycle.cycle_ns = 2500;
    inst.cycle.hypercycle = 8;
    inst.cycle.queues_per_port = 3;
    Bytes cap = 3125;  // 10 Gb/s over one 2.5 us cycle
    auto node = [&inst](const std::string& id) {
        inst.nodes.push_back({id, 5000, 0, 1'250'000});
    };
    for (const char* id : {"s1", "s2", "s3", "s4", "s5"}) node(id);
    for (const char* id : {"c1", "c2", "c3", "c4"}) node(id);
    for (const char* id : {"d1", "d2", "d3", "d4", "d5"}) node(id);
    auto arc = [&inst, cap](const std::string& t, const std::string& h) {
        inst.arcs.push_back({t, h, 0, cap});
    };
    arc("s1", "c1");
    arc("c1", "c2");
    arc("c2", "c3");
    arc("c3", "c4");
    arc("c4", "d1");
    arc("s2", "c1");
    arc("c2", "d2");
    arc("s3", "c2");
    arc("c3", "d3");
    arc("s4", "c3");
    arc("c4", "d4");
    arc("s5", "c3");
    arc("c4", "d5");
    inst.rebuild_indices();

    std::vector<FlowSpec> flows;
    auto flow = [&flows](const std::string& id, const std::string& s, const std::string& t,
                         std::int64_t gbps_x100, Bytes burst, Bytes packet) {
        FlowSpec f;
        f.id = id;
        f.src = s;
        f.dst = t;
        f.rate_bps = gbps_x100 * 10'000'000;
        f.throughput_bps = f.rate_bps;
        f.burst_bytes = burst;
        f.packet_bytes = packet;
        f.deadline_ns = us_to_ns(1000.0);
        flows.push_back(std::move(f));
    };
    flow("f1", "s1", "d1", 224, 1400, 350);
    flow("f2", "s2", "d2", 672, 4200, 1050);
    flow("f3", "s3", "d3", 672, 4200, 1050);
    flow("f4", "s4", "d4", 336, 2100, 1050);
    flow("f5", "s5", "d5", 336, 2100, 1050);

    AdmissionSolution sol;
    sol.algorithm = "manual";
    auto decide = [&sol](const std::string& id, std::vector<NodeId> path, Bytes chunk) {
        FlowDecision d;
        d.flow_id = id;
        d.accepted = true;
        d.path = std::move(path);
        d.pattern = {1, chunk};
        sol.flows.push_back(std::move(d));
    };
    decide("f1", {"s1", "c1", "c2", "c3", "c4", "d1"}, 700);
    decide("f2", {"s2", "c1", "c2", "d2"}, 2100);
    decide("f3", {"s3", "c2", "c3", "d3"}, 2100);
    decide("f4", {"s4", "c3", "c4", "d4"}, 1050);
    decide("f5", {"s5", "c3", "c4", "d5"}, 1050);
    for (const FlowSpec& f : flows) sol.accepted_throughput_bps += f.throughput_bps;

    std::vector<BeFlow> be;
    for (const auto& [s, t] : std::vector<std::pair<std::string, std::string>>{
             {"s1", "d1"}, {"s2", "d2"}, {"s3", "d3"}, {"s4", "d4"}, {"s5", "d5"}}) {
        be.push_back({s, t, 200'000'000, 300});
    }

    BundleFiles files;
    files.instance = (fs::path(dir) / "sec5a_instance.json").string();
    files.flows = (fs::path(dir) / "sec5a_flows.json").string();
    files.solution = (fs::path(dir) / "sec5a_solution.json").string();
    files.traffic = (fs::path(dir) / "sec5a_traffic.json").string();
    save_instance_file(files.instance, inst);
    save_flows_file(files.flows, flows);
    save_solution_file(files.solution, sol);
    save_traffic_file(files.traffic, be);
    return files;
}

namespace {

struct Manifest {
    GenSpec topology;
    bool has_instance_path = false;
    std::string instance_path;
    std::vector<int> flow_counts;
    std::vector<double> deadlines_us;
    std::vector<int> levels;
    std::uint64_t flows_seed = 1;
    double time_limit_s = 20.0;
    std::string out_csv = "results.csv";
    std::string out_timings_csv;  // when set, wall times leave the main CSV
    std::string out_dir;          // when set, per-row solution files are kept
};

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str());
    if (j.value("format", "") != kManifestFormat) {
        throw std::runtime_error("not a " + std::string(kManifestFormat) + " document");
    }
    Manifest m;
    if (j.contains("instance")) {
        m.has_instance_path = true;
        m.instance_path = j.at("instance").get<std::string>();
    }
    if (j.contains("topology")) {
        const json& t = j.at("topology");
        m.topology.node_count = t.value("nodes", m.topology.node_count);
        m.topology.link_count = t.value("links", m.topology.link_count);
        m.topology.capacity_level = t.value("level", m.topology.capacity_level);
        m.topology.max_prop_us = t.value("max_prop_us", m.topology.max_prop_us);
        m.topology.seed = t.value("seed", m.topology.seed);
    }
    for (const json& v : j.value("flow_counts", json::array())) m.flow_counts.push_back(v.get<int>());
    for (const json& v : j.value("deadlines_us", json::array())) {
        m.deadlines_us.push_back(v.get<double>());
    }
    for (const json& v : j.value("levels", json::array())) m.levels.push_back(v.get<int>());
    m.flows_seed = j.value("flows_seed", std::uint64_t{1});
    m.topology.burst_bytes = j.value("burst_bytes", m.topology.burst_bytes);
    m.time_limit_s = j.value("time_limit_s", m.time_limit_s);
    m.out_csv = j.value("out_csv", m.out_csv);
    m.out_timings_csv = j.value("out_timings_csv", std::string{});
    m.out_dir = j.value("out_dir", std::string{});
    if (m.flow_counts.empty()) throw std::runtime_error("manifest needs flow_counts");
    if (m.deadlines_us.empty() == m.levels.empty()) {
        throw std::runtime_error("manifest needs exactly one of deadlines_us or levels");
    }
    return m;
}

} // namespace

SweepResult run_sweep_manifest(const std::string& manifest_path) {
    Manifest m = load_manifest(manifest_path);
    SweepResult result;

    struct Axis {
        std::string family;
        int level;
        double deadline_us;
    };
    std::vector<Axis> axes;
    if (!m.levels.empty()) {
        for (int lvl : m.levels) axes.push_back({"level", lvl, 1000.0});
    } else {
        for (double d : m.deadlines_us) axes.push_back({"deadline", m.topology.capacity_level, d});
    }

    int max_flows = 0;
    for (int c : m.flow_counts) max_flows = std::max(max_flows, c);

    for (const Axis& ax : axes) {
        NetworkInstance inst;
        std::vector<FlowSpec> all_flows;
        try {
            GenSpec spec = m.topology;
            spec.capacity_level = ax.level;
            spec.deadline_us = ax.deadline_us;
            spec.flow_count = max_flows;
            spec.seed = m.topology.seed;
            if (m.has_instance_path) {
                InstanceFile f = load_instance_file(m.instance_path);
                inst = std::move(f.instance);
            } else {
                inst = generate_topology(spec);
            }
            GenSpec fspec = spec;
            fspec.seed = m.flows_seed;
            all_flows = generate_flows(fspec, inst);
        } catch (const std::exception& e) {
            for (int count : m.flow_counts) {
                SweepRow row;
                row.family = ax.family;
                row.level = ax.level;
                row.deadline_us = ax.deadline_us;
                row.flow_count = count;
                row.failed = true;
                result.rows.push_back(row);
                ++result.failures;
            }
            std::cerr << "compare: axis failed: " << e.what() << "\n";
            continue;
        }

        for (int count : m.flow_counts) {
            SweepRow row;
            row.family = ax.family;
            row.level = ax.level;
            row.deadline_us = ax.deadline_us;
            row.flow_count = count;
            auto t0 = std::chrono::steady_clock::now();
            try {
                std::vector<FlowSpec> flows(all_flows.begin(), all_flows.begin() + count);
                CgOptions cg_opts;
                cg_opts.time_limit_s = m.time_limit_s * 0.7;
                CgState cg = run_cg(inst, flows, cg_opts);
                RoundOptions ro;
                ro.time_limit_s = m.time_limit_s * 0.3;
                auto [sol, rep] = round_ilp(inst, flows, cg, ro);
                AdmissionSolution base = ospf_admit(inst, flows);
                row.th_cgx_bps = sol.accepted_throughput_bps;
                row.th_ospf_bps = base.accepted_throughput_bps;
                auto gap = throughput_gap(sol, base);
                row.gap_defined = gap.has_value();
                row.throughput_gap_percent = gap.value_or(0.0);
                row.opt_gap_percent = rep.gap_percent;
                if (!m.out_dir.empty()) {
                    fs::create_directories(m.out_dir);
                    char name[128];
                    std::snprintf(name, sizeof(name), "%s_%d_f%d", ax.family.c_str(),
                                  ax.family == "level" ? ax.level
                                                       : static_cast<int>(ax.deadline_us),
                                  count);
                    save_solution_file((fs::path(m.out_dir) / (std::string(name) + "_cgx.json")).string(), sol);
                    save_solution_file((fs::path(m.out_dir) / (std::string(name) + "_ospf.json")).string(), base);
                }
            } catch (const std::exception& e) {
                row.failed = true;
                ++result.failures;
                std::cerr << "compare: row failed: " << e.what() << "\n";
            }
            row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            result.rows.push_back(row);
        }
    }

    // Main CSV; wall times move to the side file when one is configured.
    std::ofstream out(m.out_csv, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + m.out_csv);
    bool separate_timings = !m.out_timings_csv.empty();
    out << "family,level,deadline_us,flows,Th_cgx_bps,Th_ospf_bps,throughput_gap_percent,"
           "opt_gap_percent";
    if (!separate_timings) out << ",wall_ms";
    out << ",failed\n";
    char buf[256];
    for (const SweepRow& r : result.rows) {
        std::string gap = r.gap_defined ? [&r] {
            char g[32];
            std::snprintf(g, sizeof(g), "%.3f", r.throughput_gap_percent);
            return std::string(g);
        }() : std::string("");
        std::snprintf(buf, sizeof(buf), "%s,%d,%.3f,%d,%lld,%lld,%s,%.4f", r.family.c_str(),
                      r.level, r.deadline_us, r.flow_count, static_cast<long long>(r.th_cgx_bps),
                      static_cast<long long>(r.th_ospf_bps), gap.c_str(), r.opt_gap_percent);
        out << buf;
        if (!separate_timings) out << "," << r.wall_ms;
        out << "," << (r.failed ? 1 : 0) << "\n";
    }
    out.close();
    if (separate_timings) {
        std::ofstream tout(m.out_timings_csv, std::ios::binary | std::ios::trunc);
        tout << "family,level,deadline_us,flows,wall_ms\n";
        for (const SweepRow& r : result.rows) {
            std::snprintf(buf, sizeof(buf), "%s,%d,%.3f,%d,%lld\n", r.family.c_str(), r.level,
                          r.deadline_us, r.flow_count, static_cast<long long>(r.wall_ms));
            tout << buf;
        }
    }
    return result;
}

int cmd_compare(const CompareArgs& args) {
    SweepResult res;
    try {
        res = run_sweep_manifest(args.manifest_path);
    } catch (const std::exception& e) {
        std::cerr << "compare: " << e.what() << "\n";
        return kExitUsage;
    }
    std::printf("compare: %zu rows, %d failed\n", res.rows.size(), res.failures);
    return kExitOk;
}

} // namespace dldn::cli
