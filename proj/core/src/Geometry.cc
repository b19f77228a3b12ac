//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file Geometry.cc
//---------------------------------------------------------------------------//
#include "ltid/Geometry.hh"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace ltid
{
//---------------------------------------------------------------------------//
AngularGrid build_angular_grid(int M)
{
    if (M < 4 || M % 2 != 0)
    {
        throw std::invalid_argument("ordinate count must be even and >= 4, got "
                                    + std::to_string(M));
    }
    AngularGrid result;
    result.M = M;
    result.theta.resize(M);
    result.directions.resize(M);
    result.weights.assign(M, two_pi / M);
    for (int m = 0; m < M; ++m)
    {
        // Exact values at multiples of pi/2 keep symmetric cases exact
        double th = two_pi * m / M;
        result.theta[m] = th;
        int quarter = M % 4 == 0 ? M / 4 : 0;
        if (quarter && m % quarter == 0)
        {
            static constexpr double cs[4][2]
                = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
            int q = m / quarter;
            result.directions[m] = {cs[q][0], cs[q][1]};
        }
        else
        {
            result.directions[m] = {std::cos(th), std::sin(th)};
        }
    }
    return result;
}

//---------------------------------------------------------------------------//
Domain Domain::disk(double radius, Vec2 center, double horizon, double collar)
{
    if (!(radius > 0))
    {
        throw std::invalid_argument("disk radius must be positive");
    }
    if (!(horizon > 2 * radius))
    {
        throw std::invalid_argument(
            "time horizon must exceed the domain diameter");
    }
    Domain d;
    d.radius_ = radius;
    d.center_ = center;
    d.horizon_ = horizon;
    d.collar_ = collar > 0 ? collar : (horizon - 2 * radius) / 2;
    return d;
}

Domain Domain::unit_disk(double horizon)
{
    return disk(1.0, {0, 0}, horizon);
}

bool Domain::contains(Vec2 x, double tol) const
{
    return norm(x - center_) <= radius_ + tol;
}

bool Domain::in_collar(Vec2 x) const
{
    double r = norm(x - center_);
    return r > radius_ && r < radius_ + collar_;
}

Vec2 Domain::normal(Vec2 sigma) const
{
    Vec2 p = sigma - center_;
    double r = norm(p);
    return {p.x / r, p.y / r};
}

Vec2 Domain::boundary_point(double angle) const
{
    return {center_.x + radius_ * std::cos(angle),
            center_.y + radius_ * std::sin(angle)};
}

double Domain::boundary_angle(Vec2 sigma) const
{
    double a = std::atan2(sigma.y - center_.y, sigma.x - center_.x);
    return a < 0 ? a + two_pi : a;
}

bool Domain::chord(Vec2 x, Vec2 omega, double* s0, double* s1) const
{
    Vec2 p = x - center_;
    double b = dot(p, omega);
    double c = dot(p, p) - radius_ * radius_;
    double disc = b * b - c;
    if (disc < 0)
    {
        return false;
    }
    double sq = std::sqrt(disc);
    *s0 = -b - sq;
    *s1 = -b + sq;
    return true;
}

Vec2 Domain::box_lo() const
{
    double r = radius_ + collar_;
    return {center_.x - r, center_.y - r};
}

Vec2 Domain::box_hi() const
{
    double r = radius_ + collar_;
    return {center_.x + r, center_.y + r};
}

//---------------------------------------------------------------------------//
double exit_time(Domain const& domain, Vec2 x, Vec2 omega)
{
    double tol = 1e-10 * domain.radius();
    if (!domain.contains(x, tol))
    {
        throw std::invalid_argument("exit_time: point lies outside the domain");
    }
    Vec2 p = x - domain.center();
    double b = dot(p, omega);
    double c = std::max(domain.radius() * domain.radius() - dot(p, p), 0.0);
    double sq = std::sqrt(b * b + c);
    // Avoid cancellation when the exit point is just ahead
    return b > 0 ? c / (b + sq) : sq - b;
}

//---------------------------------------------------------------------------//
namespace
{
double cell_disk_area(Domain const& domain, Vec2 x, double h)
{
    Vec2 p = x - domain.center();
    double R = domain.radius();
    double half = 0.5 * h;
    double far_x = std::abs(p.x) + half;
    double far_y = std::abs(p.y) + half;
    if (far_x * far_x + far_y * far_y <= R * R)
    {
        return h * h;
    }
    double near_x = std::max(std::abs(p.x) - half, 0.0);
    double near_y = std::max(std::abs(p.y) - half, 0.0);
    if (near_x * near_x + near_y * near_y >= R * R)
    {
        return 0;
    }
    constexpr int sub = 64;
    double dh = h / sub;
    int count = 0;
    for (int j = 0; j < sub; ++j)
    {
        double y = p.y - half + (j + 0.5) * dh;
        for (int i = 0; i < sub; ++i)
        {
            double xx = p.x - half + (i + 0.5) * dh;
            count += (xx * xx + y * y <= R * R);
        }
    }
    return count * dh * dh;
}
}  // namespace

SpatialGrid build_spatial_grid(Domain const& domain, double h, int n_boundary,
                               int pad)
{
    if (!(h > 0) || h > domain.radius())
    {
        throw std::invalid_argument("grid spacing must lie in (0, R]");
    }
    SpatialGrid g;
    g.h = h;
    int half = static_cast<int>(std::ceil(domain.radius() / h - 1e-9)) + pad;
    g.n = 2 * half + 1;
    g.origin = {domain.center().x - half * h, domain.center().y - half * h};

    g.slot_of.assign(g.num_nodes(), -1);
    for (int k = 0; k < g.num_nodes(); ++k)
    {
        if (domain.contains(g.node(k), 0.0))
        {
            g.slot_of[k] = static_cast<int>(g.inside.size());
            g.inside.push_back(k);
        }
    }
    g.volume_weights.assign(g.inside.size(), 0.0);
    for (int k = 0; k < g.num_nodes(); ++k)
    {
        double a = cell_disk_area(domain, g.node(k), h);
        if (a == 0)
        {
            continue;
        }
        if (g.slot_of[k] >= 0)
        {
            g.volume_weights[g.slot_of[k]] += a;
            continue;
        }
        // Lump exterior sliver onto the nearest interior node
        int i0 = k % g.n;
        int j0 = k / g.n;
        double best = std::numeric_limits<double>::max();
        int best_slot = -1;
        for (int dj = -2; dj <= 2; ++dj)
        {
            for (int di = -2; di <= 2; ++di)
            {
                int i = i0 + di;
                int j = j0 + dj;
                if (i < 0 || j < 0 || i >= g.n || j >= g.n)
                    continue;
                int s = g.slot_of[g.index(i, j)];
                if (s < 0)
                    continue;
                double d = norm(g.node(g.index(i, j)) - g.node(k));
                if (d < best)
                {
                    best = d;
                    best_slot = s;
                }
            }
        }
        if (best_slot < 0)
        {
            throw std::logic_error("no interior node near boundary sliver");
        }
        g.volume_weights[best_slot] += a;
    }

    int nb = n_boundary;
    if (nb <= 0)
    {
        nb = 4 * static_cast<int>(
                 std::ceil(domain.perimeter() / (4 * h) - 1e-9));
    }
    g.boundary.resize(nb);
    double ds = domain.perimeter() / nb;
    for (int b = 0; b < nb; ++b)
    {
        BoundaryNode& node = g.boundary[b];
        node.angle = two_pi * b / nb;
        Vec2 nu{std::cos(node.angle), std::sin(node.angle)};
        if (nb % 4 == 0 && b % (nb / 4) == 0)
        {
            static constexpr double cs[4][2]
                = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
            int q = b / (nb / 4);
            nu = {cs[q][0], cs[q][1]};
        }
        node.normal = nu;
        node.sigma = domain.center() + domain.radius() * nu;
        node.ds = ds;
    }
    return g;
}

//---------------------------------------------------------------------------//
int BoundarySplit::side(int m, int b) const
{
    double c = cos(m, b);
    if (std::abs(c) < tangential_tolerance)
        return 0;
    return c < 0 ? -1 : 1;
}

BoundarySplit boundary_split(SpatialGrid const& grid, AngularGrid const& angles)
{
    BoundarySplit s;
    s.M = angles.M;
    s.Nb = grid.num_boundary();
    s.cosine.resize(static_cast<size_t>(s.M) * s.Nb);
    s.weight.resize(s.cosine.size());
    s.incoming.resize(s.M);
    s.outgoing.resize(s.M);
    for (int m = 0; m < s.M; ++m)
    {
        for (int b = 0; b < s.Nb; ++b)
        {
            BoundaryNode const& node = grid.boundary[b];
            double c = dot(angles.directions[m], node.normal);
            s.cosine[m * s.Nb + b] = c;
            if (std::abs(c) < tangential_tolerance)
            {
                s.weight[m * s.Nb + b] = 0;
                continue;
            }
            s.weight[m * s.Nb + b] = std::abs(c) * node.ds;
            (c < 0 ? s.incoming : s.outgoing)[m].push_back(b);
        }
    }
    return s;
}

//---------------------------------------------------------------------------//
TimeGrid make_time_grid(double T, double dt_target)
{
    if (!(T > 0) || !(dt_target > 0))
    {
        throw std::invalid_argument("time horizon and step must be positive");
    }
    TimeGrid tg;
    tg.T = T;
    tg.steps = std::max(1, static_cast<int>(std::ceil(T / dt_target - 1e-9)));
    tg.dt = T / tg.steps;
    return tg;
}

Discretization make_discretization(Domain const& domain, GridSpec spec)
{
    Discretization d;
    d.domain = domain;
    d.spec = spec;
    d.angles = build_angular_grid(spec.M);
    d.grid = build_spatial_grid(domain, spec.h, spec.n_boundary, spec.pad);
    d.split = boundary_split(d.grid, d.angles);
    d.time = make_time_grid(domain.horizon(),
                            spec.dt > 0 ? spec.dt : 0.5 * spec.h);
    d.spec.dt = d.time.dt;
    d.spec.n_boundary = d.grid.num_boundary();
    return d;
}

GridSpec refine(Discretization const& disc, bool refine_angles)
{
    GridSpec s = disc.spec;
    s.h = 0.5 * disc.grid.h;
    s.dt = 0.5 * disc.time.dt;
    s.n_boundary = 2 * disc.grid.num_boundary();
    if (refine_angles)
    {
        s.M = 2 * disc.angles.M;
    }
    return s;
}

//---------------------------------------------------------------------------//
}  // namespace ltid
