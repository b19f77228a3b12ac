//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file Albedo.cc
//---------------------------------------------------------------------------//
#include "ltid/Albedo.hh"

#include <stdexcept>

namespace ltid
{
namespace
{
//---------------------------------------------------------------------------//
void require_same_time(BoundaryFlux const& f, Discretization const& disc)
{
    if (f.time().steps != disc.time.steps || f.Nb() != disc.grid.num_boundary()
        || f.M() != disc.angles.M)
    {
        throw std::invalid_argument("boundary flux does not match the grid");
    }
}

//! q(x) K[u](m, x) on slots, or an empty field when the kernel vanishes
PhaseSpaceField weighted_scatter(AngularKernel const& k,
                                 std::vector<double> const& q,
                                 Discretization const& disc,
                                 PhaseSpaceField const& u)
{
    if (k.empty())
        return {};
    PhaseSpaceField ku = scatter_apply(k, disc.angles, disc.grid, u);
    for (int m = 0; m < ku.M; ++m)
    {
        Complex* row = ku.ordinate(m);
        for (int s = 0; s < ku.N; ++s)
            row[s] *= q[s];
    }
    return ku;
}

std::vector<double> on_slots(CoefficientField const& f, SpatialGrid const& g)
{
    std::vector<double> result(g.num_slots());
    for (int s = 0; s < g.num_slots(); ++s)
        result[s] = f(g.slot_point(s));
    return result;
}

//---------------------------------------------------------------------------//
}  // namespace

//---------------------------------------------------------------------------//
BoundaryFlux albedo(Discretization const& disc, CoefficientField const& q,
                    AngularKernel const& kernel, BoundaryFlux const& f,
                    SolveOptions const& options)
{
    require_same_time(f, disc);
    return forward_solve(disc, q, kernel, f, options).trace;
}

BoundaryFlux adjoint_albedo(Discretization const& disc,
                            CoefficientField const& q,
                            AngularKernel const& kernel, BoundaryFlux const& g,
                            SolveOptions const& options)
{
    require_same_time(g, disc);
    return adjoint_solve(disc, q, kernel, g, options).trace;
}

Complex duality_gap(Discretization const& disc, CoefficientField const& q,
                    AngularKernel const& kernel, BoundaryFlux const& f,
                    BoundaryFlux const& g, SolveOptions const& options)
{
    if (f.side() != Side::incoming || g.side() != Side::outgoing)
    {
        throw std::invalid_argument(
            "duality gap needs incoming f and outgoing g");
    }
    require_same_time(f, disc);
    require_same_time(g, disc);
    BoundaryFlux af = albedo(disc, q, kernel, f, options);
    BoundaryFlux ag = adjoint_albedo(disc, q, kernel, g, options);
    return flux_pairing(f, ag, disc) + flux_pairing(af, g, disc);
}

//---------------------------------------------------------------------------//
GaussGap gauss_gap(Discretization const& disc, SliceFunction const& u,
                   SliceFunction const& v)
{
    SpatialGrid const& g = disc.grid;
    AngularGrid const& ang = disc.angles;
    double h = g.h;
    GaussGap result;
    for (int m = 0; m < ang.M; ++m)
    {
        Vec2 om = ang.directions[m];
        Complex vol = 0;
        for (int s = 0; s < g.num_slots(); ++s)
        {
            Vec2 x = g.slot_point(s);
            Vec2 xp = x + h * om;
            Vec2 xm = x - h * om;
            Complex d = (u(m, xp) * v(m, xp) - u(m, xm) * v(m, xm)) / (2 * h);
            vol += g.volume_weights[s] * d;
        }
        Complex bnd = 0;
        for (int b = 0; b < g.num_boundary(); ++b)
        {
            Vec2 sig = g.boundary[b].sigma;
            bnd += disc.split.cos(m, b) * g.boundary[b].ds * u(m, sig)
                   * v(m, sig);
        }
        result.volume += ang.weights[m] * vol;
        result.boundary += ang.weights[m] * bnd;
    }
    result.gap = std::abs(result.volume - result.boundary);
    return result;
}

//---------------------------------------------------------------------------//
CollisionIdentity
collision_identity_residual(Discretization const& disc,
                            CoefficientField const& q1,
                            AngularKernel const& k1,
                            CoefficientField const& q2,
                            AngularKernel const& k2, BoundaryFlux const& f,
                            BoundaryFlux const& g, SolveOptions const& options)
{
    require_same_time(f, disc);
    require_same_time(g, disc);
    SpatialGrid const& grid = disc.grid;
    AngularGrid const& ang = disc.angles;
    TimeGrid const& tg = disc.time;
    int M = ang.M;
    int N = grid.num_slots();
    size_t slice = size_t(M) * N;

    SolveOptions base = options;
    base.observer = nullptr;
    base.trajectory_stride = 0;

    // Adjoint field of the second problem at every level
    std::vector<std::complex<float>> vstore(slice * tg.levels());
    SolveOptions adj = base;
    adj.record_ordinates = {};
    adj.observer = [&](int n, PhaseSpaceField const& v) {
        std::complex<float>* dst = vstore.data() + slice * n;
        for (size_t i = 0; i < slice; ++i)
            dst[i] = std::complex<float>(v.values[i]);
    };
    adjoint_solve(disc, q2, k2, g, adj);

    std::vector<double> q1s = on_slots(q1, grid);
    std::vector<double> q2s = on_slots(q2, grid);
    Complex volume = 0;
    SolveOptions fwd = base;
    fwd.observer = [&](int n, PhaseSpaceField const& u) {
        PhaseSpaceField s1 = weighted_scatter(k1, q1s, disc, u);
        PhaseSpaceField s2 = weighted_scatter(k2, q2s, disc, u);
        std::complex<float> const* v = vstore.data() + slice * n;
        Complex level = 0;
        for (int m = 0; m < M; ++m)
        {
            Complex part = 0;
            for (int s = 0; s < N; ++s)
            {
                size_t i = size_t(m) * N + s;
                Complex integrand = (q2s[s] - q1s[s]) * u.values[i];
                if (!k1.empty())
                    integrand += s1.values[i];
                if (!k2.empty())
                    integrand -= s2.values[i];
                part += grid.volume_weights[s] * integrand
                        * Complex(v[i]);
            }
            level += ang.weights[m] * part;
        }
        volume += tg.weight(n) * level;
    };
    BoundaryFlux a1 = forward_solve(disc, q1, k1, f, fwd).trace;
    BoundaryFlux a2 = forward_solve(disc, q2, k2, f, base).trace;
    for (size_t i = 0; i < a1.values().size(); ++i)
        a1.values()[i] -= a2.values()[i];

    CollisionIdentity result;
    result.volume = volume;
    result.boundary = flux_pairing(a1, g, disc);
    result.residual = result.volume - result.boundary;
    return result;
}

//---------------------------------------------------------------------------//
}  // namespace ltid
