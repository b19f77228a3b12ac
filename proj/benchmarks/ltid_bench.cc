//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ltid_bench.cc
//---------------------------------------------------------------------------//
#include <benchmark/benchmark.h>

#include "ltid/Albedo.hh"
#include "ltid/Design.hh"
#include "ltid/Probes.hh"

using namespace ltid;

namespace
{
Domain const& disk()
{
    static Domain const d = Domain::unit_disk(2.4);
    return d;
}

Discretization grid(double h, int M)
{
    return make_discretization(disk(), GridSpec{h, 0, M});
}

ProbeSpec probe()
{
    ProbeSpec p;
    p.phi = Bump{{1.1, 0.0}, 0.09, 1.0};
    p.lambda = 10;
    p.m_tilde = 0;
    return p;
}

//---------------------------------------------------------------------------//
void BM_ForwardSolve(benchmark::State& state)
{
    auto disc = grid(1.0 / state.range(0), static_cast<int>(state.range(1)));
    auto q = CoefficientField::constant(0.5).interior(disk());
    auto k = AngularKernel::separable(
        CoefficientField::constant(0.2).interior(disk()), isotropic_phase(),
        disc.angles);
    ProbeInflow inflow(probe(), disc);
    SolveOptions opts;
    opts.interpolation = state.range(2) ? Interpolation::bicubic
                                        : Interpolation::bilinear;
    for (auto _ : state)
        benchmark::DoNotOptimize(forward_solve(disc, q, k, inflow, opts));
    state.SetItemsProcessed(state.iterations() * disc.time.levels()
                            * disc.angles.M * disc.grid.num_slots());
}
BENCHMARK(BM_ForwardSolve)
    ->Args({16, 16, 0})
    ->Args({32, 32, 0})
    ->Args({32, 32, 1})
    ->Unit(benchmark::kMillisecond);

void BM_ScatterApply(benchmark::State& state)
{
    int M = static_cast<int>(state.range(0));
    auto disc = grid(1.0 / 64, M);
    auto k = AngularKernel::separable(
        CoefficientField::constant(0.2).interior(disk()),
        henyey_greenstein(0.5), disc.angles);
    PhaseSpaceField u(M, disc.grid.num_slots());
    for (size_t i = 0; i < u.values.size(); ++i)
        u.values[i] = Complex(std::sin(0.1 * i), 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            scatter_apply(k, disc.angles, disc.grid, u));
}
BENCHMARK(BM_ScatterApply)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LineIntegral(benchmark::State& state)
{
    CoefficientField q([](Vec2 x) { return 0.3 + 0.1 * x.x; });
    q = q.interior(disk());
    Vec2 om{std::cos(0.3), std::sin(0.3)};
    for (auto _ : state)
        benchmark::DoNotOptimize(
            line_integral(q, disk(), {0.2, -0.1}, om, 1.5, 1.0 / 128));
}
BENCHMARK(BM_LineIntegral);

void BM_SelectDesign(benchmark::State& state)
{
    Basis basis = default_basis(disk());
    auto angles = build_angular_grid(64);
    DesignOptions opts;
    opts.cond_threshold = 1e3;
    for (auto _ : state)
        benchmark::DoNotOptimize(select_design(basis, angles, opts));
}
BENCHMARK(BM_SelectDesign)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
