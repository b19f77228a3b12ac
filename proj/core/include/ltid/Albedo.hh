//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ltid/Albedo.hh
//---------------------------------------------------------------------------//
#pragma once

#include <functional>

#include "Transport.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
//! Outgoing trace of the forward problem with inflow f
BoundaryFlux albedo(Discretization const& disc, CoefficientField const& q,
                    AngularKernel const& kernel, BoundaryFlux const& f,
                    SolveOptions const& options = {});

//! Incoming trace of the adjoint problem with outgoing data g
BoundaryFlux adjoint_albedo(Discretization const& disc,
                            CoefficientField const& q,
                            AngularKernel const& kernel, BoundaryFlux const& g,
                            SolveOptions const& options = {});

/*!
 * Sum of the two sides of the duality relation between A and A*.
 *
 * Returns <f, A*[g]> + <A[f], g> in the signed (omega.nu) pairing, which
 * vanishes for the continuous operators.
 */
Complex duality_gap(Discretization const& disc, CoefficientField const& q,
                    AngularKernel const& kernel, BoundaryFlux const& f,
                    BoundaryFlux const& g, SolveOptions const& options = {});

//---------------------------------------------------------------------------//
//! Phase-space function of (ordinate, point) on one time slice
using SliceFunction = std::function<Complex(int m, Vec2 x)>;

struct GaussGap
{
    Complex volume;
    Complex boundary;
    double gap{0};
};

/*!
 * Volume and boundary sides of the divergence identity for u v omega.
 *
 * The divergence is a central difference with step h; the boundary side
 * uses the dxi quadrature on the boundary nodes.
 */
GaussGap gauss_gap(Discretization const& disc, SliceFunction const& u,
                   SliceFunction const& v);

//---------------------------------------------------------------------------//
struct CollisionIdentity
{
    Complex volume;    //!< interior integrals (left side)
    Complex boundary;  //!< flux pairing of the albedo difference
    Complex residual;  //!< volume - boundary
};

/*!
 * Both sides of the identity relating two coefficient pairs to the
 * difference of their albedo operators.
 *
 * The adjoint field of the second problem is stored in single precision
 * for every time level, so memory grows like M * slots * levels * 8 bytes.
 */
CollisionIdentity
collision_identity_residual(Discretization const& disc,
                            CoefficientField const& q1,
                            AngularKernel const& k1,
                            CoefficientField const& q2,
                            AngularKernel const& k2, BoundaryFlux const& f,
                            BoundaryFlux const& g,
                            SolveOptions const& options = {});

//---------------------------------------------------------------------------//
}  // namespace ltid
