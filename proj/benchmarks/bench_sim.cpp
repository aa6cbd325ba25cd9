#include <benchmark/benchmark.h>

#include <filesystem>

#include "commands.hpp"
#include "dldn/instance_io.hpp"
#include "dldn/sim.hpp"

using namespace dldn;

// Events per second on the canned proof-of-concept scenario.
static void PocSimulation(benchmark::State& state) {
    auto dir = std::filesystem::temp_directory_path() / "dldn_bench_poc";
    std::filesystem::create_directories(dir);
    cli::BundleFiles files = cli::write_sec5a_bundle(dir.string());
    InstanceFile fi = load_instance_file(files.instance);
    auto flows = load_flows_file(files.flows);
    AdmissionSolution sol = load_solution_file(files.solution);
    auto be = load_traffic_file(files.traffic);

    SimConfig cfg;
    cfg.horizon_ns = us_to_ns(static_cast<double>(state.range(0)));
    cfg.seed = 42;
    std::int64_t packets = 0;
    for (auto _ : state) {
        SimResult res = run_simulation(fi.instance, flows, sol, be, cfg);
        packets += res.hp_delivered;
        benchmark::DoNotOptimize(res.trace.data());
    }
    state.SetItemsProcessed(packets);
}
BENCHMARK(PocSimulation)->Unit(benchmark::kMillisecond)->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
