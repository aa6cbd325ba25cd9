#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"

using namespace dldn;
using namespace dldn::cli;

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("DLDN_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            std::cerr << "warning: DLDN_SEED is not a number, using 1\n";
        }
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale lab for damper-based deterministic networking"};
    app.require_subcommand(1);

    GenerateArgs gen;
    gen.spec.seed = default_seed();
    CLI::App* g = app.add_subcommand("generate", "generate a seeded instance and flow set");
    g->add_option("--nodes", gen.spec.node_count, "node count")->required();
    g->add_option("--links", gen.spec.link_count, "undirected link count")->required();
    g->add_option("--level", gen.spec.capacity_level, "capacity level 1..10")->required();
    g->add_option("--flows", gen.spec.flow_count, "flow count")->required();
    g->add_option("--deadline-us", gen.spec.deadline_us, "shared flow deadline")->required();
    g->add_option("--seed", gen.spec.seed, "rng seed");
    g->add_option("--max-prop-us", gen.spec.max_prop_us, "max propagation delay");
    g->add_option("--burst-bytes", gen.spec.burst_bytes, "per-flow burst");
    g->add_option("--packet-bytes", gen.spec.packet_bytes, "max packet size");
    g->add_option("--cycle-us", gen.spec.cycle_us, "cycle duration T");
    g->add_option("--hypercycle", gen.spec.hypercycle, "hypercycle length HC");
    g->add_option("--out-instance", gen.out_instance, "instance output path");
    g->add_option("--out-flows", gen.out_flows, "flows output path");

    AdmitArgs admit;
    CLI::App* a = app.add_subcommand("admit", "run admission control on an instance");
    a->add_option("--instance", admit.instance_path, "instance file")->required();
    a->add_option("--flows", admit.flows_path, "flows file (optional when embedded)");
    a->add_option("--algorithm", admit.algorithm, "cgx | ospf");
    a->add_option("--time-limit-s", admit.time_limit_s, "total budget (default 300)");
    a->add_option("--cg-share", admit.cg_share, "fraction of budget for column generation");
    a->add_option("--out-solution", admit.out_solution, "solution output path");
    a->add_option("--out-report", admit.out_report, "iteration report output path");
    a->add_option("--dump-mps", admit.dump_mps, "debug: dump the final master LP in MPS format");

    SimulateArgs sim;
    sim.seed = default_seed();
    CLI::App* s = app.add_subcommand("simulate", "run the data-plane simulator");
    s->add_option("--instance", sim.instance_path, "instance file");
    s->add_option("--flows", sim.flows_path, "flows file (optional when embedded)");
    s->add_option("--solution", sim.solution_path, "admission solution file");
    s->add_option("--traffic", sim.traffic_path, "best-effort traffic file");
    s->add_option("--horizon-us", sim.horizon_us, "simulated horizon");
    s->add_option("--seed", sim.seed, "rng seed (clock phases, source offsets)");
    s->add_option("--bundle", sim.bundle, "canned scenario name (sec5a)");
    s->add_option("--out-dir", sim.out_dir, "output directory");
    s->add_option("--out-trace", sim.out_trace, "trace csv name");
    s->add_option("--out-stats", sim.out_stats, "stats csv name");

    CompareArgs cmp;
    CLI::App* c = app.add_subcommand("compare", "manifest-driven cgx/ospf sweep");
    c->add_option("--manifest", cmp.manifest_path, "sweep manifest json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (g->parsed()) return cmd_generate(gen);
        if (a->parsed()) return cmd_admit(admit);
        if (s->parsed()) {
            if (sim.bundle.empty() && (sim.instance_path.empty() || sim.solution_path.empty())) {
                std::cerr << "simulate: needs --instance and --solution (or --bundle)\n";
                return kExitUsage;
            }
            return cmd_simulate(sim);
        }
        if (c->parsed()) return cmd_compare(cmp);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
