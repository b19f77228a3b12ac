//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file DesignTest.cc
//---------------------------------------------------------------------------//
#include "ltid/Design.hh"

#include "TestData.hh"
#include "doctest.h"

using namespace ltid;
using namespace ltid::test;

namespace
{
//! P[1] and P[x_i] over the unit-disk chord in closed form
Eigen::Vector3d chord_moments(Vec2 y, Vec2 om)
{
    double b = dot(y, om);
    double c = dot(y, y) - 1;
    double disc = b * b - c;
    if (disc <= 0)
        return Eigen::Vector3d::Zero();
    double len = 2 * std::sqrt(disc);
    Vec2 mid = y - b * om;
    return {len, len * mid.x, len * mid.y};
}

//! Tensor trapezoid over the bump's bounding square
Eigen::Vector3d dense_row(Bump const& phi, Vec2 om, int n)
{
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    double w = phi.width;
    double step = 2 * w / n;
    for (int i = 0; i <= n; ++i)
    {
        for (int j = 0; j <= n; ++j)
        {
            Vec2 y = phi.center + Vec2{-w + i * step, -w + j * step};
            double p = phi(y);
            if (p != 0)
                sum += p * p * chord_moments(y, om);
        }
    }
    return sum * step * step;
}
}  // namespace

TEST_CASE("X-ray transform")
{
    Domain dom = Domain::unit_disk(2.4);
    auto one = CoefficientField::constant(1.0).interior(dom);
    CoefficientField x1([](Vec2 x) { return x.x; });
    CoefficientField x2([](Vec2 x) { return x.y; });
    x1 = x1.interior(dom);
    x2 = x2.interior(dom);
    Vec2 e{1, 0};
    CHECK(xray_transform(one, dom, e, {-3, 0.6})
          == doctest::Approx(1.6).epsilon(1e-14));
    CHECK(std::abs(xray_transform(x1, dom, e, {0.3, -0.2})) < 1e-14);
    CHECK(xray_transform(x2, dom, e, {5, 0.5})
          == doctest::Approx(0.5 * 2 * std::sqrt(0.75)).epsilon(1e-13));
    CHECK(xray_transform(one, dom, e, {0, 1.01}) == 0);

    CoefficientField wave([](Vec2 x) { return std::cos(2 * x.x + x.y); });
    wave = wave.interior(dom);
    Vec2 om{0.8, 0.6};
    double a = xray_transform(wave, dom, om, {0.1, -0.3}, 1.0 / 128);
    double b = xray_transform(wave, dom, om, {0.1, -0.3}, 0.1 / 128);
    CHECK(std::abs(a - b) <= 1e-6 * std::abs(b));
}

TEST_CASE("design matrix entries")
{
    Domain dom = Domain::unit_disk(2.4);
    Basis basis = default_basis(dom);
    auto angles = build_angular_grid(64);
    std::vector<int> dirs{0, 20, 44};
    std::vector<Bump> bumps{Bump{{-1.1, 0.0}, 0.09, 1},
                            Bump{{0.4, -1.02}, 0.09, 1},
                            Bump{{0.2, 1.08}, 0.09, 1}};
    auto d = design_matrix(basis, angles, dirs, bumps, ProbeCase::a);
    REQUIRE(d.A.rows() == 3);
    CHECK_FALSE(d.singular);
    CHECK(std::isfinite(d.cond));
    for (int j = 0; j < 3; ++j)
    {
        Eigen::Vector3d oracle
            = dense_row(bumps[j], angles.directions[dirs[j]], 600);
        double scale = oracle.cwiseAbs().maxCoeff();
        REQUIRE(scale > 0);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(d.A(j, i) - oracle(i)) <= 1e-6 * scale);
    }

    SUBCASE("row scales with the square of the bump amplitude")
    {
        auto scaled = bumps;
        scaled[1].amplitude = 3;
        auto s = design_matrix(basis, angles, dirs, scaled, ProbeCase::a);
        CHECK((s.A.row(1) - 9 * d.A.row(1)).norm()
              < 1e-12 * d.A.row(1).norm());
        CHECK((s.A.row(0) - d.A.row(0)).norm() == 0);
    }
    SUBCASE("rows are linear in the field")
    {
        Eigen::VectorXd beta(3);
        beta << 0.3, -0.7, 0.45;
        auto f = combine(basis, beta);
        Eigen::VectorXd ab = d.A * beta;
        for (int j = 0; j < 3; ++j)
        {
            double e = design_entry(f, dom, angles.directions[dirs[j]],
                                    bumps[j]);
            CHECK(std::abs(e - ab(j)) < 1e-10 * d.A.row(j).norm());
        }
    }
    SUBCASE("single probe")
    {
        Basis one = make_basis({CoefficientField::constant(1.0)}, dom);
        auto s = design_matrix(one, angles, {0}, {bumps[0]}, ProbeCase::a);
        CHECK(s.A(0, 0) > 0);
        CHECK(s.cond == 1);
    }
}

TEST_CASE("greedy design search")
{
    Domain dom = Domain::unit_disk(2.4);
    Basis basis = default_basis(dom);
    auto angles = build_angular_grid(64);
    DesignOptions opts;
    opts.cond_threshold = 1e3;
    auto d = select_design(basis, angles, opts);
    CHECK(d.k() == 3);
    CHECK(d.cond <= 1e3);
    for (int j = 0; j < 3; ++j)
    {
        CHECK(d.bumps[j].inside_collar(dom));
        // The probe direction points from the bump toward the disk
        CHECK(dot(dom.center() - d.bumps[j].center,
                  angles.directions[d.directions[j]])
              > 0);
    }
    auto again = select_design(basis, angles, opts);
    CHECK(again.directions == d.directions);
    CHECK((again.A - d.A).norm() == 0);

    certify_norm_equivalence(d, basis, 1000, 1);
    CHECK(d.norm_equivalence_bound > 0);
    CHECK(d.norm_equivalence >= d.norm_equivalence_bound);

    Basis single = make_basis({CoefficientField::constant(1.0)}, dom);
    CHECK_NOTHROW(select_design(single, angles, opts));

    opts.cond_threshold = 1.0;
    CHECK_THROWS_AS(select_design(basis, angles, opts), std::runtime_error);
}

TEST_CASE("case-b design")
{
    Domain dom = Domain::unit_disk(2.4);
    Basis basis = default_basis(dom);
    auto angles = build_angular_grid(64);
    DesignOptions opts;
    opts.kind = ProbeCase::b;
    CHECK_THROWS_AS(select_design(basis, angles, opts), std::invalid_argument);

    CaseBData cb{CoefficientField::constant(0.5).interior(dom),
                 AngularKernel::separable(CoefficientField::constant(0.2),
                                          henyey_greenstein(0.5), angles)};
    auto d = select_design(basis, angles, opts, &cb);
    double h = cb.kernel.phase_diagonal(d.directions[0]);
    // Constant q: B = q h A row by row
    CHECK((d.B - 0.5 * h * d.A).norm() < 1e-10 * d.B.norm());

    CaseBData blind{cb.q, AngularKernel::separable(
                              CoefficientField::constant(0.2),
                              [](double mu) { return 1 - mu; }, angles)};
    CHECK_THROWS_AS(select_design(basis, angles, opts, &blind),
                    std::invalid_argument);
}
