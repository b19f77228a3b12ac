//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file Fields.cc
//---------------------------------------------------------------------------//
#include "ltid/Fields.hh"

#include <limits>
#include <sstream>
#include <stdexcept>
#include <Eigen/SVD>

#include "ltid/Quadrature.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
GaussRule gauss_legendre(int n)
{
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i)
    {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter)
        {
            double p0 = 1;
            double p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2 / ((1 - x * x) * dp * dp);
    }
    return rule;
}

//---------------------------------------------------------------------------//
CoefficientField::CoefficientField(Fn fn, std::string label)
    : fn_(std::move(fn)), label_(std::move(label))
{
}

CoefficientField CoefficientField::constant(double value)
{
    if (value == 0)
        return {};
    CoefficientField f([value](Vec2) { return value; },
                       "const(" + std::to_string(value) + ")");
    f.constant_ = value;
    return f;
}

CoefficientField CoefficientField::interior(Domain const& domain) const
{
    CoefficientField f = *this;
    f.support_ = domain;
    return f;
}

double CoefficientField::sup_on(SpatialGrid const& grid) const
{
    double result = 0;
    for (int k = 0; k < grid.num_nodes(); ++k)
    {
        result = std::max(result, std::abs((*this)(grid.node(k))));
    }
    return result;
}

void CoefficientField::validate(SpatialGrid const& grid) const
{
    for (int k = 0; k < grid.num_nodes(); ++k)
    {
        double v = (*this)(grid.node(k));
        if (!std::isfinite(v))
        {
            throw std::invalid_argument("coefficient field '" + label_
                                        + "' is not finite");
        }
        if (bound_ > 0 && std::abs(v) > bound_ * (1 + 1e-12))
        {
            throw std::invalid_argument("coefficient field '" + label_
                                        + "' exceeds its declared bound");
        }
    }
}

//---------------------------------------------------------------------------//
double l2_inner(CoefficientField const& f, CoefficientField const& g,
                Domain const& domain)
{
    static GaussRule const radial = gauss_legendre(48);
    constexpr int n_theta = 160;
    double R = domain.radius();
    double sum = 0;
    for (size_t i = 0; i < radial.nodes.size(); ++i)
    {
        double r = 0.5 * R * (radial.nodes[i] + 1);
        double wr = 0.5 * R * radial.weights[i] * r;
        for (int j = 0; j < n_theta; ++j)
        {
            double th = two_pi * j / n_theta;
            Vec2 x = domain.center() + r * Vec2{std::cos(th), std::sin(th)};
            sum += wr * f(x) * g(x);
        }
    }
    return sum * two_pi / n_theta;
}

Basis make_basis(std::vector<CoefficientField> fields, Domain const& domain)
{
    if (fields.empty())
    {
        throw std::invalid_argument("basis must contain at least one field");
    }
    Basis basis;
    basis.domain = domain;
    for (auto& f : fields)
    {
        basis.fields.push_back(f.is_interior() ? f : f.interior(domain));
    }
    int k = basis.k();
    basis.gram.resize(k, k);
    for (int i = 0; i < k; ++i)
    {
        for (int j = 0; j <= i; ++j)
        {
            double v = l2_inner(basis.fields[i], basis.fields[j], domain);
            basis.gram(i, j) = v;
            basis.gram(j, i) = v;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis.gram);
    auto const& s = svd.singularValues();
    double cond = s(k - 1) > 0 ? s(0) / s(k - 1)
                               : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12))
    {
        std::ostringstream os;
        os << "basis Gram matrix is singular (condition number " << cond
           << ")";
        throw std::invalid_argument(os.str());
    }
    return basis;
}

Basis default_basis(Domain const& domain)
{
    return make_basis({CoefficientField::constant(1.0),
                       CoefficientField([](Vec2 x) { return x.x; }, "x1"),
                       CoefficientField([](Vec2 x) { return x.y; }, "x2")},
                      domain);
}

CoefficientField combine(Basis const& basis, Eigen::VectorXd const& beta)
{
    if (beta.size() != basis.k())
    {
        throw std::invalid_argument("coefficient vector length mismatch");
    }
    std::vector<CoefficientField> fields;
    std::vector<double> coef;
    for (int i = 0; i < basis.k(); ++i)
    {
        if (beta(i) != 0)
        {
            fields.push_back(basis.fields[i]);
            coef.push_back(beta(i));
        }
    }
    if (fields.empty())
    {
        return {};
    }
    CoefficientField f(
        [fields, coef](Vec2 x) {
            double v = 0;
            for (size_t i = 0; i < fields.size(); ++i)
                v += coef[i] * fields[i](x);
            return v;
        },
        "combination");
    return f.interior(basis.domain);
}

Eigen::VectorXd project_to_span(CoefficientField const& f, Basis const& basis)
{
    Eigen::VectorXd rhs(basis.k());
    for (int i = 0; i < basis.k(); ++i)
    {
        rhs(i) = l2_inner(f, basis.fields[i], basis.domain);
    }
    return basis.gram.ldlt().solve(rhs);
}

//---------------------------------------------------------------------------//
bool Bump::inside_collar(Domain const& domain) const
{
    double r0 = norm(center - domain.center());
    return r0 - width > domain.radius()
           && r0 + width < domain.radius() + domain.collar();
}

double Window::operator()(Vec2 x) const
{
    double r = norm(x - center);
    if (r <= inner)
        return 1;
    if (r >= outer)
        return 0;
    double s = (r - inner) / (outer - inner);
    double a = std::exp(-1 / s);
    double b = std::exp(-1 / (1 - s));
    return b / (a + b);
}

//---------------------------------------------------------------------------//
PhaseFunction isotropic_phase()
{
    return [](double) { return 1 / two_pi; };
}

PhaseFunction henyey_greenstein(double g)
{
    if (!(std::abs(g) < 1))
    {
        throw std::invalid_argument("anisotropy parameter must lie in (-1, 1)");
    }
    return [g](double mu) {
        return (1 - g * g) / (two_pi * (1 + g * g - 2 * g * mu));
    };
}

double poisson_kernel(double r, Vec2 omega_tilde, Vec2 omega)
{
    if (!(r > 0 && r < 1))
    {
        throw std::invalid_argument("Poisson kernel radius must lie in (0, 1)");
    }
    Vec2 d = r * omega_tilde - omega;
    return (1 - r * r) / (two_pi * dot(d, d));
}

std::vector<double> poisson_weights(AngularGrid const& angles, double r,
                                    int m_tilde, bool normalize)
{
    std::vector<double> result(angles.M);
    double mass = 0;
    for (int m = 0; m < angles.M; ++m)
    {
        result[m] = poisson_kernel(r, angles.directions[m_tilde],
                                   angles.directions[m]);
        mass += angles.weights[m] * result[m];
    }
    if (normalize)
    {
        for (double& v : result)
            v /= mass;
    }
    return result;
}

//---------------------------------------------------------------------------//
}  // namespace ltid
