//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file TransportTest.cc
//---------------------------------------------------------------------------//
#include "ltid/Transport.hh"

#include <limits>
#include <random>

#include "TestData.hh"
#include "doctest.h"

using namespace ltid;
using namespace ltid::test;

namespace
{
Discretization small_disc(double h = 1.0 / 16, int M = 16)
{
    return make_discretization(Domain::unit_disk(2.4), GridSpec{h, 0, M});
}

double relative_error(BoundaryFlux const& a, BoundaryFlux const& b,
                      Discretization const& disc)
{
    BoundaryFlux d = a;
    for (size_t i = 0; i < d.values().size(); ++i)
        d.values()[i] -= b.values()[i];
    return flux_norm(d, disc) / flux_norm(b, disc);
}

auto const vacuum_pulse = [](double t, int, Vec2 s) -> Complex {
    return pulse(t, 0.1, 0.9) * (1.5 + std::cos(std::atan2(s.y, s.x)));
};
}  // namespace

TEST_CASE("zero inflow gives zero trace")
{
    auto disc = small_disc();
    BoundaryFlux f(Side::incoming, disc.time, 16, disc.grid.num_boundary());
    auto q = CoefficientField::constant(0.5).interior(disc.domain);
    auto k = AngularKernel::separable(
        CoefficientField::constant(0.3).interior(disc.domain),
        isotropic_phase(), disc.angles);
    auto res = forward_solve(disc, q, k, f);
    for (auto v : res.trace.values())
        CHECK(v == Complex{});
}

TEST_CASE("vacuum albedo is a chord delay")
{
    auto disc = small_disc();
    auto in = sampled_inflow(disc, vacuum_pulse);
    auto res = forward_solve(disc, {}, {}, in);
    auto exact = vacuum_outflow(disc, vacuum_pulse);
    CHECK(relative_error(res.trace, exact, disc) < 1e-2);
}

TEST_CASE("vacuum adjoint is a backward translation")
{
    auto disc = small_disc();
    auto g = [](double t, int, Vec2 s) -> Complex {
        return pulse(t, 1.2, 2.2) * Complex(1 + 0.3 * s.x, 0.2 * s.y);
    };
    BoundaryFlux data(Side::outgoing, disc.time, 16, disc.grid.num_boundary());
    for (int n = 0; n < disc.time.levels(); ++n)
        for (int m = 0; m < 16; ++m)
            for (int b : disc.split.outgoing[m])
                data.at(n, m, b)
                    = g(disc.time.t(n), m, disc.grid.boundary[b].sigma);
    auto res = adjoint_solve(disc, {}, {}, data);

    // v(t, sigma) = g(t + tau, sigma + tau omega) with tau the chord length
    BoundaryFlux exact(Side::incoming, disc.time, 16, disc.grid.num_boundary());
    for (int n = 0; n < disc.time.levels(); ++n)
    {
        for (int m = 0; m < 16; ++m)
        {
            Vec2 om = disc.angles.directions[m];
            for (int b : disc.split.incoming[m])
            {
                Vec2 s = disc.grid.boundary[b].sigma;
                double tau = exit_distance(s, om);
                double t = disc.time.t(n) + tau;
                exact.at(n, m, b) = t > disc.time.T ? Complex{}
                                                    : g(t, m, s + tau * om);
            }
        }
    }
    CHECK(relative_error(res.trace, exact, disc) < 1e-2);
}

TEST_CASE("albedo is linear")
{
    auto disc = small_disc();
    auto f = smooth_inflow(disc);
    BoundaryFlux f2 = f;
    for (auto& v : f2.values())
        v *= 2.0;
    auto q = CoefficientField::constant(0.5).interior(disc.domain);
    auto k = AngularKernel::separable(
        CoefficientField::constant(0.4).interior(disc.domain),
        henyey_greenstein(0.3), disc.angles);
    auto a = forward_solve(disc, q, k, f).trace;
    auto b = forward_solve(disc, q, k, f2).trace;
    double worst = 0;
    for (size_t i = 0; i < a.values().size(); ++i)
        worst = std::max(worst, std::abs(b.values()[i] - 2.0 * a.values()[i]));
    CHECK(worst < 1e-10);
}

TEST_CASE("bilinear scheme keeps nonnegative data nonnegative")
{
    auto disc = small_disc(1.0 / 16, 16);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0, 1);
    for (int trial = 0; trial < 3; ++trial)
    {
        double a = uni(rng);
        auto in = sampled_inflow(disc, [a](double t, int m, Vec2 s) {
            return Complex(pulse(t, 0.05, 0.6 + 0.3 * a)
                               * (1 + std::sin(3 * s.x + m)),
                           0);
        });
        auto q = CoefficientField::constant(0.2 + uni(rng)).interior(
            disc.domain);
        auto k = AngularKernel::separable(
            CoefficientField::constant(0.8 * uni(rng)).interior(disc.domain),
            isotropic_phase(), disc.angles);
        double lowest = 0;
        SolveOptions opts;
        opts.observer = [&](int, PhaseSpaceField const& u) {
            for (auto v : u.values)
                lowest = std::min(lowest, v.real());
        };
        forward_solve(disc, q, k, in, opts);
        CHECK(lowest >= -1e-12);
    }
}

TEST_CASE("resolution rule")
{
    auto disc = small_disc(1.0 / 16);
    CHECK_NOTHROW(check_resolution(10, disc));
    CHECK_THROWS_AS(check_resolution(11, disc), std::invalid_argument);
}

TEST_CASE("non-finite data stops the solve")
{
    auto disc = small_disc();
    auto in = sampled_inflow(disc, [](double t, int, Vec2) {
        return t > 0.5 ? Complex(std::numeric_limits<double>::quiet_NaN())
                       : Complex{};
    });
    auto k = AngularKernel::separable(
        CoefficientField::constant(0.3).interior(disc.domain),
        isotropic_phase(), disc.angles);
    CHECK_THROWS_AS(forward_solve(disc, CoefficientField::constant(0.5), k,
                                  in),
                    std::runtime_error);
}

TEST_CASE("exact and sampled inflow agree")
{
    auto disc = small_disc(1.0 / 32, 16);
    auto in = sampled_inflow(disc, vacuum_pulse);
    FunctionInflow fn(vacuum_pulse);
    auto q = CoefficientField::constant(0.5).interior(disc.domain);
    auto a = forward_solve(disc, q, {}, in).trace;
    auto b = forward_solve(disc, q, {}, fn).trace;
    CHECK(relative_error(a, b, disc) < 5e-3);
}

TEST_CASE("isotropic scattering conserves angular mean")
{
    auto disc = small_disc(1.0 / 8, 16);
    auto k = AngularKernel::separable(CoefficientField::constant(1.0),
                                      isotropic_phase(), disc.angles);
    PhaseSpaceField u(16, disc.grid.num_slots());
    for (int m = 0; m < 16; ++m)
        for (int s = 0; s < u.N; ++s)
            u(m, s) = Complex(m, s % 5);
    auto ku = scatter_apply(k, disc.angles, disc.grid, u);
    for (int s = 0; s < u.N; s += 11)
    {
        Complex mean{};
        for (int m = 0; m < 16; ++m)
            mean += disc.angles.weights[m] * u(m, s);
        mean /= two_pi;
        for (int m = 0; m < 16; ++m)
            CHECK(std::abs(ku(m, s) - mean) < 1e-12);
    }
}
