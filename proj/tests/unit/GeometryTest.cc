//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file GeometryTest.cc
//---------------------------------------------------------------------------//
#include "ltid/Geometry.hh"

#include "doctest.h"

using namespace ltid;

TEST_CASE("angular grid")
{
    auto a = build_angular_grid(16);
    CHECK(a.M == 16);
    double sum = 0;
    for (double w : a.weights)
        sum += w;
    CHECK(sum == doctest::Approx(two_pi).epsilon(1e-14));
    for (int m = 0; m < 16; ++m)
    {
        Vec2 d = a.directions[m];
        Vec2 o = a.directions[a.opposite(m)];
        CHECK(d.x + o.x == doctest::Approx(0).epsilon(1e-14));
        CHECK(d.y + o.y == doctest::Approx(0).epsilon(1e-14));
    }
}

TEST_CASE("disk chords and exit times")
{
    Domain dom = Domain::unit_disk();
    CHECK(dom.collar() == doctest::Approx(0.2));
    double s0 = 0;
    double s1 = 0;
    REQUIRE(dom.chord({-2, 0.6}, {1, 0}, &s0, &s1));
    CHECK(s1 - s0 == doctest::Approx(1.6).epsilon(1e-14));
    CHECK_FALSE(dom.chord({-2, 1.2}, {1, 0}, &s0, &s1));

    CHECK(exit_time(dom, {0, 0}, {0.6, 0.8}) == doctest::Approx(1));
    CHECK(exit_time(dom, {0.5, 0}, {1, 0}) == doctest::Approx(0.5));
    CHECK(exit_time(dom, {-0.5, 0}, {1, 0}) == doctest::Approx(1.5));
}

TEST_CASE("spatial grid area and nesting")
{
    Domain dom = Domain::unit_disk();
    auto g = build_spatial_grid(dom, 1.0 / 32);
    double area = 0;
    for (double w : g.volume_weights)
        area += w;
    CHECK(area == doctest::Approx(pi).epsilon(1e-3));

    double perim = 0;
    for (auto const& b : g.boundary)
        perim += b.ds;
    CHECK(perim == doctest::Approx(two_pi).epsilon(1e-12));

    auto fine = build_spatial_grid(dom, 1.0 / 64, 2 * g.num_boundary());
    CHECK(fine.num_boundary() == 2 * g.num_boundary());
    for (int b = 0; b < g.num_boundary(); b += 7)
    {
        CHECK(fine.boundary[2 * b].angle
              == doctest::Approx(g.boundary[b].angle).epsilon(1e-14));
    }
}

TEST_CASE("boundary split")
{
    Domain dom = Domain::unit_disk();
    auto disc = make_discretization(dom, GridSpec{1.0 / 16, 0, 16});
    auto const& s = disc.split;
    for (int m = 0; m < 16; ++m)
    {
        // Incoming and outgoing arcs mirror each other
        CHECK(s.incoming[m].size() == s.outgoing[m].size());
        double in = 0;
        double out = 0;
        for (int b : s.incoming[m])
        {
            CHECK(s.side(m, b) == -1);
            in += s.w(m, b);
        }
        for (int b : s.outgoing[m])
            out += s.w(m, b);
        // Projected width of the unit disk
        CHECK(in == doctest::Approx(2).epsilon(2e-3));
        CHECK(out == doctest::Approx(in).epsilon(1e-12));
    }
}

TEST_CASE("time grid and refinement")
{
    Domain dom = Domain::unit_disk(2.4);
    auto disc = make_discretization(dom, GridSpec{1.0 / 16, 0, 16});
    CHECK(disc.time.dt <= 0.5 / 16 + 1e-15);
    CHECK(disc.time.t(disc.time.steps) == doctest::Approx(2.4));
    double sum = 0;
    for (int n = 0; n < disc.time.levels(); ++n)
        sum += disc.time.weight(n);
    CHECK(sum == doctest::Approx(2.4));

    auto fine = make_discretization(dom, refine(disc));
    CHECK(fine.time.steps == 2 * disc.time.steps);
    CHECK(fine.grid.h == doctest::Approx(disc.grid.h / 2));
    CHECK(fine.angles.M == disc.angles.M);
}
