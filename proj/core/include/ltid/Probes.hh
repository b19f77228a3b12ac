//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ltid/Probes.hh
//---------------------------------------------------------------------------//
#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "Fields.hh"
#include "Transport.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
enum class ProbeCase
{
    a,  //!< all directions, amplitude phi^2: identifies q
    b   //!< Poisson-concentrated around one direction: identifies c
};

/*!
 * Oscillatory boundary probe: a(omega) phi^p(sigma - t omega)
 * exp(i lambda (t - omega.sigma)).
 *
 * Case a uses a(omega) = 1; case b uses the Poisson kernel centered on the
 * detection ordinate, normalized so its quadrature sum is one.
 */
struct ProbeSpec
{
    ProbeCase kind{ProbeCase::a};
    Bump phi;
    double lambda{40};
    int m_tilde{0};
    double r{0.99};
    //! Use phi^2 as amplitude (case a) instead of phi
    bool squared{true};
};

//! Throws on under-resolution, collar violation or bad ordinate
void validate(ProbeSpec const& spec, Discretization const& disc);

//! Spatial amplitude phi or phi^2
double probe_amplitude(ProbeSpec const& spec, Vec2 y);

//! Angular factor a(omega_m) for every ordinate
std::vector<double> probe_angular_weights(ProbeSpec const& spec,
                                          AngularGrid const& angles);

/*!
 * Exact probe inflow evaluated at the characteristic entry points.
 */
class ProbeInflow final : public Inflow
{
  public:
    ProbeInflow(ProbeSpec const& spec, Discretization const& disc);

    double carrier() const final { return spec_.lambda; }
    void envelope(int m, std::span<double const> times,
                  std::span<EntryPoint const> points,
                  std::span<Complex> out) const final;

  private:
    ProbeSpec spec_;
    std::vector<double> weights_;
    std::vector<Vec2> directions_;
    double T_;
};

//! Probe sampled on every incoming node, ordinate and time level
BoundaryFlux make_probe(ProbeSpec const& spec, Discretization const& disc);
BoundaryFlux make_probe_a(ProbeSpec const& spec, Discretization const& disc);
BoundaryFlux make_probe_b(ProbeSpec const& spec, Discretization const& disc);

//---------------------------------------------------------------------------//
//! Integral of the zero extension of q over x - s*omega, s in [0, t]
double line_integral(CoefficientField const& q, Domain const& domain, Vec2 x,
                     Vec2 omega, double t, double max_step);

enum class AnsatzSign
{
    forward,  //!< psi exp(-int q) exp(+i lambda (t - omega.x))
    adjoint   //!< psi exp(+int q) exp(-i lambda (t - omega.x))
};

/*!
 * Geometric-optics field psi(m, x - t omega) exp(-+int q) exp(+-i lambda
 * (t - omega.x)).
 *
 * \c psi must vanish on the closed disk, which makes the attenuation a
 * full backward chord integral wherever the field is nonzero.
 */
class Ansatz
{
  public:
    using Profile = std::function<double(int m, Vec2 y)>;

    Ansatz(CoefficientField q, Profile psi, double lambda, AnsatzSign sign,
           Discretization const& disc);

    Complex operator()(int m, double t, Vec2 x) const;
    //! All slots at time t; chord attenuations are cached on first use
    PhaseSpaceField slice(double t) const;

  private:
    CoefficientField q_;
    Profile psi_;
    double lambda_;
    double sign_;
    Discretization const& disc_;
    mutable std::vector<double> chord_;  // [m * slots + s]
    std::unique_ptr<std::once_flag> chord_once_;
};

//! Forward field matching the probe
Ansatz ansatz_fields(CoefficientField const& q, ProbeSpec const& spec,
                     AnsatzSign sign, Discretization const& disc);

//! Smooth cutoff equal to one on the bump support and zero on the disk
Window measurement_window(Bump const& phi, Domain const& domain);

//---------------------------------------------------------------------------//
struct RemainderRecord
{
    double lambda{0};
    double h{0};
    //! sup over levels of the L2(S x Omega) norm of u - Phi
    double norm{0};
    //! sup over levels of the L2(Omega) norm at the detection ordinate
    double direction_norm{0};
    //! Same quantities for Phi itself, for scale
    double ansatz_norm{0};
};

//! How the probe enters the solver
enum class ProbeData
{
    exact,   //!< analytic inflow at the characteristic entry points
    sampled  //!< boundary samples from make_probe, interpolated
};

/*!
 * Difference between the computed solution for the probe and the
 * geometric-optics ansatz.
 *
 * With exact data the uncollided part matches the ansatz to roundoff, so the
 * remainder is the collided field plus its discretization error.
 */
RemainderRecord remainder(Discretization const& disc,
                          CoefficientField const& q,
                          AngularKernel const& kernel, ProbeSpec const& spec,
                          SolveOptions const& options = {},
                          ProbeData data = ProbeData::exact);

//! Remainders over a ladder of frequencies on one grid
std::vector<RemainderRecord>
remainder_ladder(Discretization const& disc, CoefficientField const& q,
                 AngularKernel const& kernel, ProbeSpec const& spec,
                 std::vector<double> const& lambdas,
                 SolveOptions const& options = {},
                 ProbeData data = ProbeData::exact);

//---------------------------------------------------------------------------//
/*!
 * Source profile Z(t, omega_m, x_s) = a(m) z(t, x_s) on the grid slots.
 *
 * \c spatial fills z for one frequency and time over all slots.
 */
struct SourceProfile
{
    std::vector<double> angular;
    std::function<void(double lambda, double t, std::span<Complex> out)>
        spatial;
};

/*!
 * Z(t, omega, x) = c(x) h(omega, omega~) phi(x - t omega~)
 * exp(int_0^t q(x - s omega~) ds) exp(i lambda x.omega~).
 *
 * The time derivative of Z does not depend on lambda and Z(T) = 0 when the
 * bump lies in the collar and T exceeds the diameter plus twice the collar.
 */
SourceProfile case_b_source(CoefficientField const& q,
                            AngularKernel const& kernel, ProbeSpec const& spec,
                            Discretization const& disc);

struct WeakDecayRecord
{
    double lambda{0};
    //! sup over levels of the L2(Q) norm of the adjoint solution S
    double s_norm{0};
    //! sup over levels of the L2(Q) norm of w(t) = int_t^T S
    double w_norm{0};
};

/*!
 * Solve the adjoint problem with source q exp(-i lambda t) Z and zero data
 * and record the norms of S and of its time antiderivative from T.
 */
std::vector<WeakDecayRecord>
weak_time_decay(Discretization const& disc, CoefficientField const& q,
                AngularKernel const& kernel, SourceProfile const& Z,
                std::vector<double> const& lambdas,
                SolveOptions const& options = {});

//---------------------------------------------------------------------------//
}  // namespace ltid
