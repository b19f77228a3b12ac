//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file FieldsTest.cc
//---------------------------------------------------------------------------//
#include "ltid/Fields.hh"

#include <random>

#include "ltid/Transport.hh"

#include "doctest.h"

using namespace ltid;

TEST_CASE("coefficient fields")
{
    Domain dom = Domain::unit_disk();
    auto c = CoefficientField::constant(0.5).interior(dom);
    CHECK(c({0.2, 0.3}) == 0.5);
    CHECK(c({1.5, 0}) == 0);
    CHECK(*c.constant_value() == 0.5);
    CHECK(CoefficientField::constant(0).is_zero());

    auto g = build_spatial_grid(dom, 1.0 / 8);
    CoefficientField bad([](Vec2 x) { return 1 / x.x; }, "bad");
    CHECK_THROWS_AS(bad.validate(g), std::invalid_argument);
    CoefficientField big([](Vec2) { return 2.0; }, "big");
    big.set_bound(1);
    CHECK_THROWS_AS(big.validate(g), std::invalid_argument);
}

TEST_CASE("basis projection")
{
    Domain dom = Domain::unit_disk();
    Basis b = default_basis(dom);
    REQUIRE(b.k() == 3);
    // Gram of {1, x1, x2} on the unit disk: diag(pi, pi/4, pi/4)
    CHECK(b.gram(0, 0) == doctest::Approx(pi).epsilon(1e-12));
    CHECK(b.gram(1, 1) == doctest::Approx(pi / 4).epsilon(1e-12));
    CHECK(std::abs(b.gram(0, 1)) < 1e-13);

    Eigen::VectorXd beta(3);
    beta << 0.3, 0.1, -0.2;
    auto f = combine(b, beta);
    CHECK(f({0.5, 0.5}) == doctest::Approx(0.3 + 0.05 - 0.1));
    CHECK(f({2, 0}) == 0);
    Eigen::VectorXd back = project_to_span(f, b);
    CHECK((back - beta).norm() < 1e-12);

    // r^2 - 1/2 is orthogonal to the span
    CoefficientField r2([](Vec2 x) { return x.x * x.x + x.y * x.y - 0.5; });
    CHECK(project_to_span(r2, b).norm() < 1e-12);
}

TEST_CASE("duplicate basis field is rejected")
{
    Domain dom = Domain::unit_disk();
    auto one = CoefficientField::constant(1.0);
    CHECK_THROWS_AS(make_basis({one, one}, dom), std::invalid_argument);
}

TEST_CASE("window")
{
    Window w{{1.1, 0}, 0.09, 0.099};
    CHECK(w({1.1, 0}) == 1);
    CHECK(w({1.19, 0}) == 1);
    CHECK(w({1.0, 0}) == 0);
    double mid = w({1.1 + 0.0945, 0});
    CHECK(mid == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("phase functions")
{
    auto a = build_angular_grid(256);
    for (auto h : {isotropic_phase(), henyey_greenstein(0.5),
                   henyey_greenstein(-0.3)})
    {
        double sum = 0;
        for (int m = 0; m < a.M; ++m)
            sum += a.weights[m] * h(a.directions[m].x);
        CHECK(sum == doctest::Approx(1).epsilon(1e-10));
    }
    CHECK_THROWS_AS(henyey_greenstein(1.0), std::invalid_argument);
}

TEST_CASE("Poisson concentration")
{
    double r = 0.99;
    Vec2 e{1, 0};
    double ratio = poisson_kernel(r, e, e) / poisson_kernel(r, e, -e);
    CHECK(ratio == doctest::Approx(39601).epsilon(1e-10));

    // Equispaced sum of the Poisson kernel: (1 + r^M) / (1 - r^M)
    auto a = build_angular_grid(256);
    auto raw = poisson_weights(a, r, 5, false);
    double mass = 0;
    for (int m = 0; m < a.M; ++m)
        mass += a.weights[m] * raw[m];
    double rM = std::pow(r, 256);
    CHECK(mass == doctest::Approx((1 + rM) / (1 - rM)).epsilon(1e-12));

    auto chi = poisson_weights(a, r, 5, true);
    double unit = 0;
    for (int m = 0; m < a.M; ++m)
        unit += a.weights[m] * chi[m];
    CHECK(unit == doctest::Approx(1).epsilon(1e-6));
    CHECK_THROWS_AS(poisson_kernel(1.0, e, e), std::invalid_argument);
}

TEST_CASE("kernel bound on random fields")
{
    Domain dom = Domain::unit_disk();
    auto disc = make_discretization(dom, GridSpec{1.0 / 16, 0, 32});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1, 1);
    int violations = 0;
    for (int trial = 0; trial < 20; ++trial)
    {
        double g = 0.8 * uni(rng);
        double a0 = 0.5 + 0.4 * uni(rng);
        CoefficientField c([a0](Vec2 x) { return a0 + 0.2 * x.x * x.y; });
        auto k = AngularKernel::separable(c.interior(dom), henyey_greenstein(g),
                                          disc.angles);
        auto bounds = kernel_bounds(k, disc.angles, disc.grid);
        PhaseSpaceField u(disc.angles.M, disc.grid.num_slots());
        for (auto& v : u.values)
            v = Complex(uni(rng), uni(rng));
        auto ku = scatter_apply(k, disc.angles, disc.grid, u);
        double lhs = l2_norm(ku, disc.angles, disc.grid);
        double rhs = std::max(bounds.M1, bounds.M2)
                     * l2_norm(u, disc.angles, disc.grid);
        violations += lhs > rhs;
    }
    CHECK(violations == 0);
}

TEST_CASE("kernel reversal")
{
    auto a = build_angular_grid(8);
    auto k = AngularKernel::separable(CoefficientField::constant(1.0),
                                      henyey_greenstein(0.4), a);
    CHECK_FALSE(k.isotropic());
    auto r = k.reversed_adjoint(a);
    // A symmetric table h(w'.w) is invariant under the reversal
    CHECK((r.terms()[0].table - k.terms()[0].table).norm() < 1e-14);
    CHECK(k.phase_diagonal(3) == doctest::Approx(1.4 / (two_pi * 0.6)));
}
