//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file Kernel.cc
//---------------------------------------------------------------------------//
#include <stdexcept>

#include "ltid/Fields.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
AngularKernel AngularKernel::separable(CoefficientField c, PhaseFunction h,
                                       AngularGrid const& angles)
{
    AngularKernel k;
    if (c.is_zero())
        return k;
    KernelTerm term;
    term.c = std::move(c);
    term.table.resize(angles.M, angles.M);
    for (int mp = 0; mp < angles.M; ++mp)
    {
        for (int m = 0; m < angles.M; ++m)
        {
            term.table(mp, m)
                = h(dot(angles.directions[mp], angles.directions[m]));
        }
    }
    k.terms_.push_back(std::move(term));
    return k;
}

AngularKernel AngularKernel::from_terms(std::vector<KernelTerm> terms)
{
    AngularKernel k;
    for (auto& t : terms)
    {
        if (t.table.rows() != t.table.cols())
            throw std::invalid_argument("kernel table must be square");
        if (!k.terms_.empty() && t.table.rows() != k.M())
            throw std::invalid_argument("kernel tables differ in size");
        if (!t.c.is_zero())
            k.terms_.push_back(std::move(t));
    }
    return k;
}

int AngularKernel::M() const
{
    return terms_.empty() ? 0 : static_cast<int>(terms_.front().table.rows());
}

bool AngularKernel::isotropic() const
{
    for (auto const& t : terms_)
    {
        double lo = t.table.minCoeff();
        double hi = t.table.maxCoeff();
        if (hi - lo > 1e-14 * std::max(std::abs(hi), 1.0))
            return false;
    }
    return true;
}

double AngularKernel::phase_diagonal(int m) const
{
    if (terms_.size() != 1)
    {
        throw std::logic_error("phase diagonal requires a separable kernel");
    }
    return terms_.front().table(m, m);
}

AngularKernel AngularKernel::with_coefficient(CoefficientField c) const
{
    if (terms_.size() != 1)
    {
        throw std::logic_error("coefficient swap requires a separable kernel");
    }
    AngularKernel k;
    if (c.is_zero())
        return k;
    k.terms_.push_back({std::move(c), terms_.front().table});
    return k;
}

AngularKernel AngularKernel::reversed_adjoint(AngularGrid const& angles) const
{
    AngularKernel k;
    int M = angles.M;
    for (auto const& t : terms_)
    {
        KernelTerm r;
        r.c = t.c;
        r.table.resize(M, M);
        for (int a = 0; a < M; ++a)
        {
            for (int b = 0; b < M; ++b)
            {
                r.table(a, b) = t.table(angles.opposite(b), angles.opposite(a));
            }
        }
        k.terms_.push_back(std::move(r));
    }
    return k;
}

//---------------------------------------------------------------------------//
KernelBounds kernel_bounds(AngularKernel const& kernel,
                           AngularGrid const& angles, SpatialGrid const& grid)
{
    KernelBounds result;
    if (kernel.empty())
        return result;
    int M = angles.M;
    Eigen::Map<Eigen::VectorXd const> w(angles.weights.data(), M);

    if (kernel.terms().size() == 1)
    {
        auto const& t = kernel.terms().front();
        Eigen::MatrixXd a = t.table.cwiseAbs();
        // Column m: integral over omega'; row mp: integral over omega
        double col = (w.transpose() * a).maxCoeff();
        double row = (a * w).maxCoeff();
        double cmax = t.c.sup_on(grid);
        result.M1 = cmax * col;
        result.M2 = cmax * row;
        return result;
    }

    Eigen::MatrixXd kx(M, M);
    for (int node = 0; node < grid.num_nodes(); ++node)
    {
        Vec2 x = grid.node(node);
        kx.setZero();
        for (auto const& t : kernel.terms())
        {
            double c = t.c(x);
            if (c != 0)
                kx += c * t.table;
        }
        Eigen::MatrixXd a = kx.cwiseAbs();
        result.M1 = std::max(result.M1, (w.transpose() * a).maxCoeff());
        result.M2 = std::max(result.M2, (a * w).maxCoeff());
    }
    return result;
}

//---------------------------------------------------------------------------//
}  // namespace ltid
