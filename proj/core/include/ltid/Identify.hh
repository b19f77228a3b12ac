//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ltid/Identify.hh
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "Design.hh"
#include "Probes.hh"
#include "Transport.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
/*!
 * Outgoing flux of one probe, recorded only at its detection ordinate.
 */
struct MeasurementRecord
{
    ProbeSpec probe;
    BoundaryFlux flux;
};

struct MeasurementSet
{
    std::vector<MeasurementRecord> records;
    //! Free-form description of how the data were produced
    std::string provenance;
    double noise{0};
};

//! One probe per design row, with amplitude phi^2 for case a and phi for b
std::vector<ProbeSpec> design_probes(DesignResult const& design, double lambda,
                                     double r = 0.99);

/*!
 * Forward solves for every probe, keeping the detection ordinate.
 *
 * Probes enter as exact inflow. Probes run one after another; each solve
 * is parallel internally.
 */
MeasurementSet simulate_measurements(Discretization const& disc,
                                     CoefficientField const& q,
                                     AngularKernel const& kernel,
                                     std::vector<ProbeSpec> const& probes,
                                     SolveOptions const& options = {});

//! Restrict a flux from a refined grid to the coarse levels and nodes
BoundaryFlux subsample(BoundaryFlux const& fine, Discretization const& coarse);
MeasurementSet subsample(MeasurementSet const& fine,
                         Discretization const& coarse);

//! Multiply each entry by 1 + level * (xi_re + i xi_im) / sqrt(2)
void add_noise(MeasurementSet& set, double level, std::uint64_t seed);

/*!
 * Weight Psi on the outgoing nodes of one ordinate.
 */
BoundaryFlux outgoing_weight(Ansatz const& psi, int m,
                             Discretization const& disc);

/*!
 * Sum over levels and outgoing nodes of trapezoid dt times (omega.nu) ds
 * times (measured - simulated) Psi at the detection ordinate.
 */
Complex measurement_functional(BoundaryFlux const& measured,
                               BoundaryFlux const& simulated,
                               BoundaryFlux const& weight, int m,
                               Discretization const& disc);

//---------------------------------------------------------------------------//
enum class ReconstructionMode
{
    iterative,
    ballistic
};

enum class ReconstructionStatus
{
    converged,
    max_iterations,
    diverged
};

struct IdentifyOptions
{
    ReconstructionMode mode{ReconstructionMode::iterative};
    //! Stop when the sup norm of the update drops below this (default 1e-4 M)
    double tol{0};
    int max_iter{20};
    //! Designs whose system matrix is worse conditioned are rejected
    double cond_threshold{1e6};
    //! Starting coefficients (default zero)
    Eigen::VectorXd initial;
    SolveOptions solve;
};

struct ReconstructionResult
{
    Eigen::VectorXd beta;
    //! Euclidean norm of the measurement misfit at each evaluated iterate
    std::vector<double> residuals;
    //! Sup norm of each update
    std::vector<double> updates;
    int iterations{0};
    ReconstructionStatus status{ReconstructionStatus::converged};
    ReconstructionMode mode{ReconstructionMode::iterative};
    double lambda{0};
    double r{0};
    double wall_seconds{0};
};

/*!
 * Recover q in the span of the basis from case-a measurements.
 *
 * Each iteration simulates at the current q, pairs the misfit with the
 * adjoint ansatz built from the current q, solves A delta = m and updates.
 */
ReconstructionResult reconstruct_q(MeasurementSet const& measurements,
                                   DesignResult const& design,
                                   Basis const& basis,
                                   AngularKernel const& kernel,
                                   Discretization const& disc,
                                   IdentifyOptions const& options = {});

/*!
 * Recover the scattering coefficient c of a separable kernel, with q and the
 * phase function known, from case-b measurements.
 *
 * \c kernel supplies the angular table; its spatial coefficient is replaced
 * by the current iterate.
 */
ReconstructionResult reconstruct_c(MeasurementSet const& measurements,
                                   DesignResult const& design,
                                   Basis const& basis,
                                   CoefficientField const& q,
                                   AngularKernel const& kernel,
                                   Discretization const& disc,
                                   IdentifyOptions const& options = {});

//! Coherent fraction w_m chi(m) of a case-b probe at its detection ordinate
double coherent_fraction(ProbeSpec const& spec, AngularGrid const& angles);

//---------------------------------------------------------------------------//
}  // namespace ltid
