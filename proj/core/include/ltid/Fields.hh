//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ltid/Fields.hh
//---------------------------------------------------------------------------//
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>
#include <Eigen/Dense>

#include "Geometry.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
/*!
 * Real coefficient field on the plane.
 *
 * An interior field is the zero extension of its values on the closed disk.
 * A declared sup bound, when positive, is checked by \c validate.
 */
class CoefficientField
{
  public:
    using Fn = std::function<double(Vec2)>;

    //! Identically zero field
    CoefficientField() = default;
    explicit CoefficientField(Fn fn, std::string label = {});

    static CoefficientField constant(double value);

    //! Copy that vanishes outside the closed disk
    CoefficientField interior(Domain const& domain) const;

    double operator()(Vec2 x) const
    {
        if (!fn_)
            return 0;
        if (support_
            && norm(x - support_->center()) > support_->radius() * (1 + 1e-13))
            return 0;
        return fn_(x);
    }

    bool is_zero() const { return !fn_; }
    //! Constant value inside the support, if the field is constant there
    std::optional<double> constant_value() const { return constant_; }
    bool is_interior() const { return support_.has_value(); }
    std::string const& label() const { return label_; }

    void set_bound(double bound) { bound_ = bound; }
    double bound() const { return bound_; }

    //! Max |value| over grid nodes (all nodes, including exterior)
    double sup_on(SpatialGrid const& grid) const;
    //! Throws if a node value is non-finite or exceeds the declared bound
    void validate(SpatialGrid const& grid) const;

  private:
    Fn fn_;
    std::optional<Domain> support_;
    std::optional<double> constant_;
    std::string label_;
    double bound_{0};
};

//---------------------------------------------------------------------------//
/*!
 * Finite basis spanning the admissible coefficients.
 */
struct Basis
{
    Domain domain;
    std::vector<CoefficientField> fields;
    Eigen::MatrixXd gram;

    int k() const { return static_cast<int>(fields.size()); }
};

double l2_inner(CoefficientField const& f, CoefficientField const& g,
                Domain const& domain);

//! Throws std::invalid_argument if the Gram matrix is numerically singular
Basis make_basis(std::vector<CoefficientField> fields, Domain const& domain);
//! Basis {1, x1, x2} restricted to the disk
Basis default_basis(Domain const& domain);

CoefficientField combine(Basis const& basis, Eigen::VectorXd const& beta);
Eigen::VectorXd project_to_span(CoefficientField const& f, Basis const& basis);

//---------------------------------------------------------------------------//
/*!
 * Smooth compactly supported bump exp(-1/(1 - |x-x0|^2/w^2)).
 */
struct Bump
{
    Vec2 center;
    double width{0.1};
    double amplitude{1};

    double operator()(Vec2 x) const
    {
        double dx = x.x - center.x;
        double dy = x.y - center.y;
        double s = (dx * dx + dy * dy) / (width * width);
        if (s >= 1)
            return 0;
        return amplitude * std::exp(-1 / (1 - s));
    }

    //! Whether the closed support disk lies inside the collar
    bool inside_collar(Domain const& domain) const;
};

//---------------------------------------------------------------------------//
/*!
 * Smooth radial cutoff: one inside \c inner, zero beyond \c outer.
 */
struct Window
{
    Vec2 center;
    double inner{0.1};
    double outer{0.15};

    double operator()(Vec2 x) const;
};

//---------------------------------------------------------------------------//
// ANGULAR KERNELS
//---------------------------------------------------------------------------//
//! Angular profile h(omega' . omega)
using PhaseFunction = std::function<double(double)>;

PhaseFunction isotropic_phase();
PhaseFunction henyey_greenstein(double g);

//! Poisson kernel of the unit disk restricted to the circle
double poisson_kernel(double r, Vec2 omega_tilde, Vec2 omega);

/*!
 * Poisson kernel sampled at ordinates around ordinate \c m_tilde.
 *
 * With \c normalize the samples are rescaled so their quadrature sum is one.
 */
std::vector<double> poisson_weights(AngularGrid const& angles, double r,
                                    int m_tilde, bool normalize = true);

//---------------------------------------------------------------------------//
/*!
 * One separable piece c(x) H(m', m) of a collision kernel.
 */
struct KernelTerm
{
    CoefficientField c;
    //! table(mp, m): weight for scattering from ordinate mp into m
    Eigen::MatrixXd table;
};

/*!
 * Collision kernel as a sum of separable terms on the ordinate grid.
 *
 * A single term with table h(omega_mp . omega_m) is the separable kernel
 * c(x) h(omega' . omega). Several terms represent low-rank general kernels.
 */
class AngularKernel
{
  public:
    AngularKernel() = default;

    static AngularKernel separable(CoefficientField c, PhaseFunction h,
                                   AngularGrid const& angles);
    static AngularKernel from_terms(std::vector<KernelTerm> terms);

    bool empty() const { return terms_.empty(); }
    int M() const;
    std::vector<KernelTerm> const& terms() const { return terms_; }

    //! Whether every table is constant (scattering is an angular mean)
    bool isotropic() const;
    //! Diagonal table entry h(omega_m, omega_m) of a separable kernel
    double phase_diagonal(int m) const;

    //! Same angular tables with a new spatial coefficient (separable only)
    AngularKernel with_coefficient(CoefficientField c) const;

    //! Kernel of the time- and direction-reversed adjoint problem
    AngularKernel reversed_adjoint(AngularGrid const& angles) const;

  private:
    std::vector<KernelTerm> terms_;
};

struct KernelBounds
{
    double M1{0};
    double M2{0};
};

KernelBounds kernel_bounds(AngularKernel const& kernel,
                           AngularGrid const& angles, SpatialGrid const& grid);

//---------------------------------------------------------------------------//
}  // namespace ltid
