//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ltid/Transport.hh
//---------------------------------------------------------------------------//
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "Fields.hh"
#include "Geometry.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
/*!
 * Complex phase-space values u[m][s] at one time level.
 *
 * Spatial index s runs over the grid slots (nodes in the closed disk).
 */
struct PhaseSpaceField
{
    int M{0};
    int N{0};
    double t{0};
    std::vector<Complex> values;

    PhaseSpaceField() = default;
    PhaseSpaceField(int m, int n, double time = 0)
        : M(m), N(n), t(time), values(static_cast<size_t>(m) * n)
    {
    }

    Complex& operator()(int m, int s) { return values[size_t(m) * N + s]; }
    Complex operator()(int m, int s) const
    {
        return values[size_t(m) * N + s];
    }
    Complex* ordinate(int m) { return values.data() + size_t(m) * N; }
    Complex const* ordinate(int m) const
    {
        return values.data() + size_t(m) * N;
    }
};

//! Discrete L2(S x Omega) norm
double l2_norm(PhaseSpaceField const& u, AngularGrid const& angles,
               SpatialGrid const& grid);
//! Discrete L2(Omega) norm of one ordinate
double l2_norm_ordinate(PhaseSpaceField const& u, SpatialGrid const& grid,
                        int m);

//---------------------------------------------------------------------------//
enum class Side
{
    incoming,
    outgoing
};

/*!
 * Time-resolved complex flux on one side of the phase-space boundary.
 *
 * Values are stored for a subset of ordinates (all by default), every time
 * level and every boundary node; entries off the declared side stay zero.
 * The carrier is a hint that values oscillate like exp(i c (t - omega.sigma))
 * and is used to demodulate before interpolation.
 */
class BoundaryFlux
{
  public:
    BoundaryFlux() = default;
    BoundaryFlux(Side side, TimeGrid const& time, int M, int Nb,
                 std::vector<int> ordinates = {});

    Side side() const { return side_; }
    TimeGrid const& time() const { return time_; }
    int M() const { return M_; }
    int Nb() const { return Nb_; }
    std::vector<int> const& ordinates() const { return ordinates_; }
    bool records(int m) const { return slot_[m] >= 0; }

    //! Position of an entry in values()
    size_t index(int n, int m, int b) const
    {
        return (size_t(n) * ordinates_.size() + slot_[m]) * Nb_ + b;
    }
    Complex& at(int n, int m, int b) { return values_[index(n, m, b)]; }
    Complex at(int n, int m, int b) const { return values_[index(n, m, b)]; }

    std::vector<Complex>& values() { return values_; }
    std::vector<Complex> const& values() const { return values_; }

    //! Zero every entry that is not on the declared side
    void restrict_to_side(BoundarySplit const& split);

    double carrier{0};

  private:
    Side side_{Side::incoming};
    TimeGrid time_;
    int M_{0};
    int Nb_{0};
    std::vector<int> ordinates_;
    std::vector<int> slot_;
    std::vector<Complex> values_;
};

//! Signed flux pairing: sum over levels, ordinates, nodes of
//! (trapezoid dt) w_m (omega.nu) ds a b
Complex flux_pairing(BoundaryFlux const& a, BoundaryFlux const& b,
                     Discretization const& disc);

//! L^p(dxi dt) norm over the side's nodes
double flux_norm(BoundaryFlux const& f, Discretization const& disc,
                 double p = 2);

//---------------------------------------------------------------------------//
/*!
 * Boundary point where a characteristic enters the domain.
 */
struct EntryPoint
{
    Vec2 sigma;
    double angle{0};
};

/*!
 * Source of inflow boundary data.
 *
 * Data have the form f = fhat * exp(i c (t - omega.sigma)) with carrier c;
 * implementations return the envelope fhat, which must vanish for t < 0.
 * Evaluation may happen concurrently from several threads.
 */
class Inflow
{
  public:
    virtual ~Inflow() = default;
    virtual double carrier() const { return 0; }
    virtual void envelope(int m, std::span<double const> times,
                          std::span<EntryPoint const> points,
                          std::span<Complex> out) const
        = 0;
};

/*!
 * Inflow interpolated from a sampled boundary flux.
 *
 * Linear in time and in boundary arc angle, after removing the carrier.
 * Near tangency a neighbor that lies off the sampled side is dropped.
 */
class SampledInflow final : public Inflow
{
  public:
    SampledInflow(BoundaryFlux const& flux, Discretization const& disc);

    double carrier() const final { return carrier_; }
    void envelope(int m, std::span<double const> times,
                  std::span<EntryPoint const> points,
                  std::span<Complex> out) const final;

    //! Arc interpolation weights for one entry point
    struct Tap
    {
        int b0{0};
        int b1{0};
        double w0{0};
        double w1{0};
    };
    Tap tap(int m, double angle) const;
    //! Envelope at time t through a precomputed tap
    Complex evaluate(int m, Tap const& tap, double t) const;

    BoundaryFlux const& flux() const { return flux_; }
    //! Samples with the carrier removed, in flux storage order
    std::vector<Complex> const& demodulated() const { return data_; }

  private:
    BoundaryFlux const& flux_;
    BoundarySplit const& split_;
    double carrier_;
    std::vector<Complex> data_;
};

/*!
 * Inflow from a callable f(t, m, sigma) with no carrier.
 */
class FunctionInflow final : public Inflow
{
  public:
    using Fn = std::function<Complex(double t, int m, Vec2 sigma)>;
    explicit FunctionInflow(Fn fn) : fn_(std::move(fn)) {}

    void envelope(int m, std::span<double const> times,
                  std::span<EntryPoint const> points,
                  std::span<Complex> out) const final;

  private:
    Fn fn_;
};

//---------------------------------------------------------------------------//
/*!
 * Interior source term added to the right-hand side of the equation.
 */
class VolumeSource
{
  public:
    virtual ~VolumeSource() = default;
    //! Source at level n for ordinate m on every grid slot
    virtual void evaluate(int n, double t, int m, std::span<Complex> out) const
        = 0;
};

//---------------------------------------------------------------------------//
enum class Interpolation
{
    bilinear,
    bicubic
};

using StepObserver = std::function<void(int n, PhaseSpaceField const& u)>;

struct SolveOptions
{
    //! Bilinear keeps the scheme positive; bicubic is less diffusive
    Interpolation interpolation{Interpolation::bilinear};
    //! Carrier for the collided update; defaults to the inflow carrier
    std::optional<double> carrier;
    //! Ordinates recorded in the boundary trace (empty: all)
    std::vector<int> record_ordinates;
    //! Called once per time level in solution time order
    StepObserver observer;
    VolumeSource const* source{nullptr};
    //! Keep every k-th slice in the result (0 keeps none)
    int trajectory_stride{0};
};

struct SolveResult
{
    //! Outgoing trace (forward) or incoming trace (adjoint)
    BoundaryFlux trace;
    std::vector<PhaseSpaceField> trajectory;
};

/*!
 * Solve d_t u + omega.grad u + q u = q K[u] with zero initial data and
 * inflow f, returning the trace on the outgoing boundary.
 *
 * The solution is split into an uncollided part, evaluated exactly along
 * characteristics from the inflow, and a collided part advanced
 * semi-Lagrangian with the scattering source applied before each step.
 */
SolveResult forward_solve(Discretization const& disc,
                          CoefficientField const& q,
                          AngularKernel const& kernel, Inflow const& inflow,
                          SolveOptions const& options = {});
SolveResult forward_solve(Discretization const& disc,
                          CoefficientField const& q,
                          AngularKernel const& kernel,
                          BoundaryFlux const& inflow,
                          SolveOptions const& options = {});

/*!
 * Solve d_t v + omega.grad v - q v = -q K*[v] + s with v(T) = 0 and data g
 * on the outgoing boundary, returning the trace on the incoming boundary.
 *
 * The inflow callable and the volume source are given in the original time
 * and ordinates; internally the problem is reversed in time and direction.
 */
SolveResult adjoint_solve(Discretization const& disc,
                          CoefficientField const& q,
                          AngularKernel const& kernel, Inflow const& data,
                          SolveOptions const& options = {});
SolveResult adjoint_solve(Discretization const& disc,
                          CoefficientField const& q,
                          AngularKernel const& kernel,
                          BoundaryFlux const& data,
                          SolveOptions const& options = {});

/*!
 * Angular collision operator K (or its adjoint) on one slice.
 */
PhaseSpaceField scatter_apply(AngularKernel const& kernel,
                              AngularGrid const& angles,
                              SpatialGrid const& grid,
                              PhaseSpaceField const& u, bool adjoint = false);

//! Throws if lambda*h or lambda*dt exceeds 2*pi/10
void check_resolution(double lambda, Discretization const& disc);

//---------------------------------------------------------------------------//
}  // namespace ltid
