//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ltid/Design.hh
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <vector>
#include <Eigen/Dense>

#include "Fields.hh"
#include "Probes.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
/*!
 * Line integral of a field over the full line through x along omega.
 *
 * The field is taken as zero outside the disk, so the integral runs over the
 * chord only.
 */
double xray_transform(CoefficientField const& rho, Domain const& domain,
                      Vec2 omega, Vec2 x, double max_step = 1.0 / 128);

//! Integral of P_omega[rho] phi^2 over the support of phi
double design_entry(CoefficientField const& rho, Domain const& domain,
                    Vec2 omega, Bump const& phi, double max_step = 1.0 / 128);

//---------------------------------------------------------------------------//
/*!
 * Probe directions and bumps with the matrix that maps basis coefficients to
 * linearized measurements.
 *
 * Rows are probes and columns are basis fields: A(j, i) is the integral of
 * P_{omega_j}[rho_i] phi_j^2, so that measurements m = A beta.
 * For case b, B(j, i) = h(omega_j, omega_j) times the same integral of
 * q rho_i.
 */
struct DesignResult
{
    ProbeCase kind{ProbeCase::a};
    std::vector<int> directions;
    std::vector<Bump> bumps;
    Eigen::MatrixXd A;
    double s_min{0};
    double cond{0};
    Eigen::MatrixXd B;
    double cond_B{0};
    //! Set when the smallest singular value is zero to working precision
    bool singular{false};
    std::uint64_t seed{0};
    //! Smallest sum_j |(A beta)_j| seen over sampled unit-sup combinations
    double norm_equivalence{0};
    //! Lower bound s_min * min ||beta||_2 over the same samples
    double norm_equivalence_bound{0};

    int k() const { return static_cast<int>(directions.size()); }
    //! Matrix used by the reconstruction for this case
    Eigen::MatrixXd const& system() const
    {
        return kind == ProbeCase::b ? B : A;
    }
};

//! Optional data for case-b designs
struct CaseBData
{
    CoefficientField q;
    AngularKernel kernel;
};

DesignResult design_matrix(Basis const& basis, AngularGrid const& angles,
                           std::vector<int> const& directions,
                           std::vector<Bump> const& bumps, ProbeCase kind,
                           CaseBData const* caseb = nullptr,
                           double max_step = 1.0 / 128);

struct DesignOptions
{
    ProbeCase kind{ProbeCase::a};
    int pool_directions{32};
    int pool_centers{16};
    double cond_threshold{1e6};
    std::uint64_t seed{0};
    //! Extra seeds tried when the case-b matrix misses the threshold
    int fallback_seeds{4};
    double max_step{1.0 / 128};
};

/*!
 * Greedy search over a pool of (ordinate, collar bump) pairs maximizing the
 * smallest singular value of the growing matrix.
 *
 * Bumps sit at the middle of the collar with width 0.45 of the collar, and
 * only pairs whose direction points from the bump toward the disk are kept.
 * Throws std::runtime_error with the best condition number on failure.
 */
DesignResult select_design(Basis const& basis, AngularGrid const& angles,
                           DesignOptions const& options,
                           CaseBData const* caseb = nullptr);

/*!
 * Sample random unit-sup combinations and record the discrete norm
 * equivalence sum_j |(A beta)_j| >= s_min ||beta||_2.
 */
void certify_norm_equivalence(DesignResult& design, Basis const& basis,
                              int samples = 1000, std::uint64_t seed = 0);

//---------------------------------------------------------------------------//
}  // namespace ltid
