// Microbenchmarks for the hot paths: fundamental-system solves,
// characteristic determinant evaluation, and eigenvalue localization.

#include <benchmark/benchmark.h>

#include "diracspec/potential.hpp"
#include "diracspec/boundary.hpp"
#include "diracspec/spectrum.hpp"

namespace {

dirac::Potential make_potential() {
    dirac::Potential Q;
    Q.q1 = dirac::ScalarCoef::expression("0.2*cos(x)");
    Q.q2 = dirac::ScalarCoef::expression("0.3*sin(x)");
    Q.q3 = dirac::ScalarCoef::expression("0.3*sin(x)");
    Q.q4 = dirac::ScalarCoef::zero();
    return Q;
}

dirac::SpectralProblem make_problem() {
    return dirac::SpectralProblem(make_potential(), dirac::dirichlet_form(),
                                  dirac::Grid::make(512), dirac::SolveOptions{});
}

void BM_FundamentalPair(benchmark::State& state) {
    dirac::DiracSolver solver(make_potential());
    auto grid = dirac::Grid::make(static_cast<size_t>(state.range(0)));
    for (auto _ : state) {
        auto fp = solver.dense_pair({5.0, 0.5}, grid);
        benchmark::DoNotOptimize(fp);
    }
}
BENCHMARK(BM_FundamentalPair)->Arg(256)->Arg(1024);

void BM_CharDet(benchmark::State& state) {
    auto p = make_problem();
    double t = 0.0;
    for (auto _ : state) {
        t += 0.001;
        benchmark::DoNotOptimize(p.char_det({5.0 + t, 0.25}));
    }
}
BENCHMARK(BM_CharDet);

void BM_Localize(benchmark::State& state) {
    auto p = make_problem();
    for (auto _ : state) {
        auto pts = dirac::localize(p, 1, 3);
        benchmark::DoNotOptimize(pts);
    }
}
BENCHMARK(BM_Localize);

}  // namespace

BENCHMARK_MAIN();
