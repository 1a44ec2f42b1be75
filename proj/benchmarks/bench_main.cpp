// Microbenchmarks for the hot kernels: normal quantile evaluation, increment stream
// generation and coarsening, the two solvers, and the scalar implicit step.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <cstdint>

#include "sddetem/model.hpp"
#include "sddetem/noise.hpp"
#include "sddetem/solver.hpp"
#include "sddetem/truncation.hpp"

namespace {

sddetem::ModelParams bench_params() {
    sddetem::ModelParams p;
    p.alpha = 4.0;
    p.mu = 2.0;
    p.sigma = 0.5;
    p.gamma = 2.0;
    p.r = 2.0 / 3.0;
    p.theta = 0.6;
    p.tau = 2.0;
    return p;
}

sddetem::TruncationPolicy bench_policy() {
    sddetem::PolicyOverrides o;
    o.envelope = sddetem::example_envelope();
    o.psi_scale = 1.0;
    o.psi_exponent = 2.0 / 3.0;
    o.delta_star = 1.0;
    return sddetem::make_policy(sddetem::validate_params(bench_params()), o);
}

void BM_inverse_normal_cdf(benchmark::State& state) {
    double p = 0.0001;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sddetem::inverse_normal_cdf(p));
        p += 0.0001;
        if (p >= 1.0) p = 0.0001;
    }
}
BENCHMARK(BM_inverse_normal_cdf);

void BM_generate(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    std::uint64_t pid = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sddetem::generate(1, pid++, 1e-3, count));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(count));
}
BENCHMARK(BM_generate)->Arg(1 << 10)->Arg(1 << 14);

void BM_coarsen(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    const sddetem::IncrementStream fine = sddetem::generate(1, 0, 1e-3, count);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sddetem::coarsen(fine, 4));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(count));
}
BENCHMARK(BM_coarsen)->Arg(1 << 14);

void BM_solve_tem(benchmark::State& state) {
    const auto steps = static_cast<std::size_t>(state.range(0));
    const sddetem::TruncationPolicy policy = bench_policy();
    const sddetem::SolverGrid grid{1e-2, 200, steps};
    const sddetem::InitialSegment init = sddetem::constant_initial(0.2, 2.0, 200);
    const sddetem::IncrementStream noise = sddetem::generate(1, 0, 1e-2, steps);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sddetem::solve_tem(policy, init, grid, noise));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_solve_tem)->Arg(400)->Arg(4000);

void BM_solve_bem(benchmark::State& state) {
    const auto steps = static_cast<std::size_t>(state.range(0));
    const sddetem::ValidatedParams vp = sddetem::validate_params(bench_params());
    const sddetem::SolverGrid grid{1e-2, 200, steps};
    const sddetem::InitialSegment init = sddetem::constant_initial(0.2, 2.0, 200);
    const sddetem::IncrementStream noise = sddetem::generate(1, 0, 1e-2, steps);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sddetem::solve_bem(vp, init, grid, noise));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_solve_bem)->Arg(400)->Arg(4000);

void BM_implicit_step(benchmark::State& state) {
    const sddetem::ModelParams p = bench_params();
    double rhs = 0.2;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sddetem::implicit_step_solve(p, 1e-2, rhs));
        rhs += 1e-4;
        if (rhs > 2.0) rhs = 0.2;
    }
}
BENCHMARK(BM_implicit_step);

}  // namespace

BENCHMARK_MAIN();
