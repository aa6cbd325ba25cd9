#include <benchmark/benchmark.h>

#include "dldn/lp.hpp"
#include "dldn/rng.hpp"

using namespace dldn;

namespace {

LinearProgram make_lp(int m, int n, std::uint64_t seed) {
    Rng rng(seed);
    LinearProgram lp;
    for (int i = 0; i < m; ++i) lp.add_row("r", 1.0 + rng.uniform_real() * 9.0);
    for (int j = 0; j < n; ++j) {
        LpColumn col;
        col.objective = rng.uniform_real() * 5.0;
        int anchor = static_cast<int>(rng.uniform(0, m - 1));
        for (int i = 0; i < m; ++i) {
            if (i == anchor || rng.uniform(0, 3) == 0) {
                col.entries.push_back({i, 0.2 + rng.uniform_real() * 2.0});
            }
        }
        lp.add_column(std::move(col));
    }
    return lp;
}

} // namespace

static void SimplexSolve(benchmark::State& state) {
    LinearProgram lp = make_lp(static_cast<int>(state.range(0)),
                               static_cast<int>(state.range(1)), 23);
    for (auto _ : state) {
        LpSolution sol = solve_lp(lp);
        benchmark::DoNotOptimize(sol.objective);
    }
}
BENCHMARK(SimplexSolve)->Args({20, 40})->Args({60, 120})->Args({150, 300});

static void BranchAndBound(benchmark::State& state) {
    LinearProgram lp = make_lp(10, static_cast<int>(state.range(0)), 31);
    for (LpColumn& c : lp.columns) c.binary = true;
    for (auto _ : state) {
        IntegerSolveResult res = solve_ip_exact(lp);
        benchmark::DoNotOptimize(res.objective);
    }
}
BENCHMARK(BranchAndBound)->Arg(12)->Arg(20);

BENCHMARK_MAIN();
