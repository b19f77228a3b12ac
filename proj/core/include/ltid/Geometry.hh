//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ltid/Geometry.hh
//---------------------------------------------------------------------------//
#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace ltid
{
//---------------------------------------------------------------------------//
using Complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2 * pi;

//---------------------------------------------------------------------------//
/*!
 * Point or vector in the plane.
 */
struct Vec2
{
    double x{0};
    double y{0};
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

//---------------------------------------------------------------------------//
/*!
 * Equispaced discrete ordinates on the unit circle.
 *
 * Ordinate \c m has angle \f$ \theta_m = 2\pi m / M \f$ and weight
 * \f$ 2\pi / M \f$. M is even so that every ordinate has an antipode.
 */
struct AngularGrid
{
    int M{0};
    std::vector<double> theta;
    std::vector<Vec2> directions;
    std::vector<double> weights;

    int size() const { return M; }
    int opposite(int m) const { return (m + M / 2) % M; }
};

AngularGrid build_angular_grid(int M);

//---------------------------------------------------------------------------//
/*!
 * Disk domain with an exterior collar and a time horizon.
 *
 * The collar \f$ \Omega_\varepsilon \f$ is the open annulus of width
 * \c collar outside the disk. By default the collar width is
 * \f$ (T - \mathrm{diam}\,\Omega)/2 \f$.
 */
class Domain
{
  public:
    Domain() = default;
    static Domain disk(double radius, Vec2 center, double horizon,
                       double collar = 0);
    static Domain unit_disk(double horizon = 2.4);

    double radius() const { return radius_; }
    Vec2 center() const { return center_; }
    double collar() const { return collar_; }
    double horizon() const { return horizon_; }
    double diameter() const { return 2 * radius_; }
    double perimeter() const { return two_pi * radius_; }

    //! Whether x lies in the closed disk (with absolute tolerance)
    bool contains(Vec2 x, double tol = 1e-12) const;
    //! Whether x lies in the open collar
    bool in_collar(Vec2 x) const;
    //! Outward unit normal at a boundary point
    Vec2 normal(Vec2 sigma) const;
    Vec2 boundary_point(double angle) const;
    double boundary_angle(Vec2 sigma) const;

    //! Parameters s0 <= s1 where x + s*omega meets the circle
    bool chord(Vec2 x, Vec2 omega, double* s0, double* s1) const;

    //! Lower-left and upper-right corners covering the disk and collar
    Vec2 box_lo() const;
    Vec2 box_hi() const;

  private:
    double radius_{1};
    Vec2 center_{};
    double horizon_{2.4};
    double collar_{0.2};
};

double exit_time(Domain const& domain, Vec2 x, Vec2 omega);

//---------------------------------------------------------------------------//
/*!
 * Node on the domain boundary.
 */
struct BoundaryNode
{
    Vec2 sigma;
    Vec2 normal;
    double angle{0};
    double ds{0};
};

//---------------------------------------------------------------------------//
/*!
 * Cartesian node grid over a square box containing the disk.
 *
 * Node (i, j) sits at origin + h*(i, j). The disk center is a node, so
 * halving h nests the coarse nodes in the fine grid. Nodes inside the
 * closed disk are numbered by "slot"; volume weights live on slots and
 * integrate exactly the area of the disk up to the supersampling error.
 */
class SpatialGrid
{
  public:
    double h{0};
    int n{0};
    Vec2 origin;
    std::vector<int> inside;
    std::vector<int> slot_of;
    std::vector<double> volume_weights;
    std::vector<BoundaryNode> boundary;

    int num_nodes() const { return n * n; }
    int num_slots() const { return static_cast<int>(inside.size()); }
    int num_boundary() const { return static_cast<int>(boundary.size()); }
    int index(int i, int j) const { return i + n * j; }
    Vec2 node(int k) const
    {
        return {origin.x + h * (k % n), origin.y + h * (k / n)};
    }
    Vec2 slot_point(int s) const { return node(inside[s]); }
};

SpatialGrid build_spatial_grid(Domain const& domain, double h,
                               int n_boundary = 0, int pad = 3);

//---------------------------------------------------------------------------//
/*!
 * Incoming/outgoing decomposition of the boundary per ordinate.
 */
struct BoundarySplit
{
    int M{0};
    int Nb{0};
    //! omega_m . nu_b, indexed [m * Nb + b]
    std::vector<double> cosine;
    //! |omega_m . nu_b| ds, zero on tangential nodes
    std::vector<double> weight;
    std::vector<std::vector<int>> incoming;
    std::vector<std::vector<int>> outgoing;

    double cos(int m, int b) const { return cosine[m * Nb + b]; }
    double w(int m, int b) const { return weight[m * Nb + b]; }
    //! -1 incoming, +1 outgoing, 0 tangential
    int side(int m, int b) const;
};

inline constexpr double tangential_tolerance = 1e-12;

BoundarySplit boundary_split(SpatialGrid const& grid,
                             AngularGrid const& angles);

//---------------------------------------------------------------------------//
/*!
 * Uniform time levels t_n = n * dt, n = 0..steps.
 */
struct TimeGrid
{
    double T{0};
    int steps{0};
    double dt{0};

    double t(int n) const { return n * dt; }
    int levels() const { return steps + 1; }
    //! Trapezoid weight of level n
    double weight(int n) const
    {
        return (n == 0 || n == steps) ? 0.5 * dt : dt;
    }
};

TimeGrid make_time_grid(double T, double dt_target);

//---------------------------------------------------------------------------//
/*!
 * Resolution parameters for a phase-space discretization.
 *
 * Zero entries select defaults: dt = h/2 and about one boundary node per h
 * of arc length.
 */
struct GridSpec
{
    double h{1.0 / 64};
    double dt{0};
    int M{64};
    int n_boundary{0};
    int pad{3};
};

struct Discretization
{
    Domain domain;
    AngularGrid angles;
    SpatialGrid grid;
    BoundarySplit split;
    TimeGrid time;
    GridSpec spec;
};

Discretization make_discretization(Domain const& domain, GridSpec spec);

//! Spec with h and dt halved and boundary nodes doubled
GridSpec refine(Discretization const& disc, bool refine_angles = false);

//---------------------------------------------------------------------------//
}  // namespace ltid
