#include <benchmark/benchmark.h>

#include "dldn/cgx.hpp"
#include "dldn/gen.hpp"
#include "dldn/rng.hpp"

using namespace dldn;

namespace {

struct Fixture {
    NetworkInstance inst;
    std::vector<double> cost;
    std::vector<Nanoseconds> delay;

    explicit Fixture(int nodes) {
        GenSpec spec;
        spec.node_count = nodes;
        spec.link_count = nodes * 2;
        spec.capacity_level = 10;
        spec.seed = 5;
        inst = generate_topology(spec);
        Rng rng(17);
        cost.resize(inst.arcs.size());
        delay.resize(inst.arcs.size());
        for (size_t a = 0; a < inst.arcs.size(); ++a) {
            cost[a] = rng.uniform(0, 1000) / 100.0;
            delay[a] = arc_delay(inst, static_cast<int>(a));
        }
    }
};

} // namespace

static void CspLabelSetting(benchmark::State& state) {
    Fixture fx(static_cast<int>(state.range(0)));
    Nanoseconds budget = us_to_ns(500.0);
    size_t found = 0;
    for (auto _ : state) {
        auto res = csp_shortest_path(fx.inst, fx.cost, fx.delay, budget,
                                     fx.inst.nodes.front().id, fx.inst.nodes.back().id);
        if (res) ++found;
        benchmark::DoNotOptimize(res);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(CspLabelSetting)->Arg(25)->Arg(50)->Arg(100);

BENCHMARK_MAIN();
