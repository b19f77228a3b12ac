//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file Design.cc
//---------------------------------------------------------------------------//
#include "ltid/Design.hh"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ltid/Parallel.hh"
#include "ltid/Quadrature.hh"

namespace ltid
{
namespace
{
//---------------------------------------------------------------------------//
struct PointRule
{
    std::vector<Vec2> points;
    std::vector<double> weights;
};

//! Polar Gauss rule over the bump support with phi^2 folded into the weights
PointRule bump_rule(Bump const& phi, int n_radial, int n_theta)
{
    GaussRule g = gauss_legendre(n_radial);
    PointRule rule;
    double w = phi.width;
    for (int i = 0; i < n_radial; ++i)
    {
        double r = 0.5 * w * (g.nodes[i] + 1);
        double wr = 0.5 * w * g.weights[i] * r * two_pi / n_theta;
        for (int j = 0; j < n_theta; ++j)
        {
            double th = two_pi * (j + 0.5) / n_theta;
            Vec2 y = phi.center + r * Vec2{std::cos(th), std::sin(th)};
            double p = phi(y);
            if (p == 0)
                continue;
            rule.points.push_back(y);
            rule.weights.push_back(wr * p * p);
        }
    }
    return rule;
}

double integrate(CoefficientField const& rho, Domain const& domain,
                 Vec2 omega, PointRule const& rule, double max_step)
{
    double sum = 0;
    for (size_t i = 0; i < rule.points.size(); ++i)
    {
        sum += rule.weights[i]
               * xray_transform(rho, domain, omega, rule.points[i], max_step);
    }
    return sum;
}

constexpr int full_radial = 32;
constexpr int full_theta = 64;
constexpr int search_radial = 12;
constexpr int search_theta = 24;

//! Fields whose transforms form the rows: rho_i, or q rho_i for case b
std::vector<CoefficientField> row_fields(Basis const& basis, ProbeCase kind,
                                         CaseBData const* caseb)
{
    if (kind == ProbeCase::a)
        return basis.fields;
    if (!caseb)
        throw std::invalid_argument("case-b design needs q and the kernel");
    std::vector<CoefficientField> out;
    for (auto const& rho : basis.fields)
    {
        CoefficientField q = caseb->q;
        CoefficientField r = rho;
        out.push_back(
            CoefficientField([q, r](Vec2 x) { return q(x) * r(x); },
                             "q*" + rho.label())
                .interior(basis.domain));
    }
    return out;
}

double phase_factor(ProbeCase kind, CaseBData const* caseb, int m)
{
    if (kind == ProbeCase::a)
        return 1;
    double h = caseb->kernel.phase_diagonal(m);
    if (std::abs(h) < 1e-10)
    {
        std::ostringstream os;
        os << "phase function vanishes on the diagonal at ordinate " << m;
        throw std::invalid_argument(os.str());
    }
    return h;
}

double smallest_singular(Eigen::MatrixXd const& rows)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);
    auto const& s = svd.singularValues();
    return s.size() ? s(s.size() - 1) : 0;
}

std::pair<double, double> singular_range(Eigen::MatrixXd const& a)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    auto const& s = svd.singularValues();
    return {s(0), s(s.size() - 1)};
}

double condition(double smax, double smin)
{
    return smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
}

struct Candidate
{
    int m;
    Bump bump;
};

//---------------------------------------------------------------------------//
}  // namespace

//---------------------------------------------------------------------------//
double xray_transform(CoefficientField const& rho, Domain const& domain,
                      Vec2 omega, Vec2 x, double max_step)
{
    if (rho.is_zero())
        return 0;
    double s0 = 0;
    double s1 = 0;
    if (!domain.chord(x, omega, &s0, &s1) || s1 <= s0)
        return 0;
    if (auto c = rho.constant_value())
        return *c * (s1 - s0);
    return simpson([&](double s) { return rho(x + s * omega); }, s0, s1,
                   max_step);
}

double design_entry(CoefficientField const& rho, Domain const& domain,
                    Vec2 omega, Bump const& phi, double max_step)
{
    return integrate(rho, domain, omega,
                     bump_rule(phi, full_radial, full_theta), max_step);
}

//---------------------------------------------------------------------------//
DesignResult design_matrix(Basis const& basis, AngularGrid const& angles,
                           std::vector<int> const& directions,
                           std::vector<Bump> const& bumps, ProbeCase kind,
                           CaseBData const* caseb, double max_step)
{
    if (directions.size() != bumps.size())
    {
        throw std::invalid_argument("need one bump per direction");
    }
    for (int m : directions)
    {
        if (m < 0 || m >= angles.M)
            throw std::invalid_argument("design direction is not an ordinate");
    }
    DesignResult d;
    d.kind = kind;
    d.directions = directions;
    d.bumps = bumps;
    int k = basis.k();
    int rows = static_cast<int>(directions.size());
    d.A.resize(rows, k);
    std::vector<CoefficientField> weighted;
    if (kind == ProbeCase::b)
    {
        weighted = row_fields(basis, kind, caseb);
        d.B.resize(rows, k);
    }
    parallel_for(rows, [&](int j) {
        Vec2 om = angles.directions[directions[j]];
        PointRule rule = bump_rule(bumps[j], full_radial, full_theta);
        for (int i = 0; i < k; ++i)
        {
            d.A(j, i) = integrate(basis.fields[i], basis.domain, om, rule,
                                  max_step);
        }
        if (kind == ProbeCase::b)
        {
            double h = phase_factor(kind, caseb, directions[j]);
            for (int i = 0; i < k; ++i)
            {
                d.B(j, i) = h
                            * integrate(weighted[i], basis.domain, om, rule,
                                        max_step);
            }
        }
    });
    if (rows > 0)
    {
        auto [smax, smin] = singular_range(d.A);
        d.s_min = smin;
        d.cond = condition(smax, smin);
        d.singular = !(smin > smax * std::numeric_limits<double>::epsilon()
                                  * std::max(rows, k));
        if (kind == ProbeCase::b)
        {
            auto [bmax, bmin] = singular_range(d.B);
            d.cond_B = condition(bmax, bmin);
            d.singular = d.singular
                         || !(bmin > bmax
                                         * std::numeric_limits<double>::epsilon()
                                         * std::max(rows, k));
        }
    }
    return d;
}

//---------------------------------------------------------------------------//
DesignResult select_design(Basis const& basis, AngularGrid const& angles,
                           DesignOptions const& options,
                           CaseBData const* caseb)
{
    if (options.pool_directions <= 0 || options.pool_centers <= 0)
        throw std::invalid_argument("design pool must be nonempty");
    Domain const& dom = basis.domain;
    int k = basis.k();
    std::vector<CoefficientField> fields
        = row_fields(basis, options.kind, caseb);

    // Candidate pool: ordinates spread over the circle, bumps mid-collar
    double eps = dom.collar();
    double rc = dom.radius() + 0.5 * eps;
    double width = 0.45 * eps;
    std::vector<Candidate> pool;
    for (int i = 0; i < options.pool_directions; ++i)
    {
        int m = static_cast<int>(
            std::lround(double(i) * angles.M / options.pool_directions)
            % angles.M);
        Vec2 om = angles.directions[m];
        for (int c = 0; c < options.pool_centers; ++c)
        {
            double th = two_pi * c / options.pool_centers;
            Vec2 center = dom.center() + rc * Vec2{std::cos(th), std::sin(th)};
            Vec2 to_disk = dom.center() - center;
            double along = dot(to_disk, om);
            double perp = std::abs(to_disk.x * om.y - to_disk.y * om.x);
            if (along > 0 && perp < dom.radius())
                pool.push_back({m, Bump{center, width, 1.0}});
        }
    }
    if (static_cast<int>(pool.size()) < k)
        throw std::runtime_error("design pool has fewer candidates than k");

    // Rows for every candidate with a coarse rule
    int np = static_cast<int>(pool.size());
    Eigen::MatrixXd rows(np, k);
    parallel_for(np, [&](int c) {
        Vec2 om = angles.directions[pool[c].m];
        PointRule rule = bump_rule(pool[c].bump, search_radial, search_theta);
        double h = phase_factor(options.kind, caseb, pool[c].m);
        for (int i = 0; i < k; ++i)
        {
            rows(c, i)
                = h * integrate(fields[i], dom, om, rule, options.max_step);
        }
    });

    double best_cond = std::numeric_limits<double>::infinity();
    int attempts = options.kind == ProbeCase::b ? 1 + options.fallback_seeds
                                                : 1;
    for (int attempt = 0; attempt < attempts; ++attempt)
    {
        std::uint64_t seed = options.seed + attempt;
        std::vector<int> order(np);
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);

        auto sigma_with = [&](std::vector<int> const& chosen) {
            Eigen::MatrixXd sub(chosen.size(), k);
            for (size_t r = 0; r < chosen.size(); ++r)
                sub.row(r) = rows.row(chosen[r]);
            return smallest_singular(sub);
        };

        // Greedy growth
        std::vector<int> chosen;
        for (int step = 0; step < k; ++step)
        {
            int best = -1;
            double best_s = -1;
            for (int c : order)
            {
                if (std::find(chosen.begin(), chosen.end(), c) != chosen.end())
                    continue;
                chosen.push_back(c);
                double s = sigma_with(chosen);
                chosen.pop_back();
                if (s > best_s)
                {
                    best_s = s;
                    best = c;
                }
            }
            chosen.push_back(best);
        }
        // Exchange passes until no single swap improves
        double current = sigma_with(chosen);
        for (bool improved = true; improved;)
        {
            improved = false;
            for (int slot = 0; slot < k; ++slot)
            {
                for (int c : order)
                {
                    if (std::find(chosen.begin(), chosen.end(), c)
                        != chosen.end())
                        continue;
                    int old = chosen[slot];
                    chosen[slot] = c;
                    double s = sigma_with(chosen);
                    if (s > current * (1 + 1e-12))
                    {
                        current = s;
                        improved = true;
                    }
                    else
                    {
                        chosen[slot] = old;
                    }
                }
            }
        }

        std::vector<int> dirs;
        std::vector<Bump> bumps;
        for (int c : chosen)
        {
            dirs.push_back(pool[c].m);
            bumps.push_back(pool[c].bump);
        }
        DesignResult d = design_matrix(basis, angles, dirs, bumps,
                                       options.kind, caseb, options.max_step);
        d.seed = seed;
        double c = options.kind == ProbeCase::b ? std::max(d.cond, d.cond_B)
                                                : d.cond;
        if (!d.singular && c <= options.cond_threshold)
            return d;
        best_cond = std::min(best_cond, c);
    }
    std::ostringstream os;
    os << "no design meets the condition threshold "
       << options.cond_threshold << " (best condition number " << best_cond
       << ")";
    throw std::runtime_error(os.str());
}

//---------------------------------------------------------------------------//
void certify_norm_equivalence(DesignResult& design, Basis const& basis,
                              int samples, std::uint64_t seed)
{
    Eigen::MatrixXd const& a = design.system();
    int k = basis.k();
    if (a.cols() != k)
        throw std::invalid_argument("design does not match the basis");

    // Sup norm sampled on a polar grid of the closed disk
    Domain const& dom = basis.domain;
    std::vector<Vec2> pts{dom.center()};
    for (int i = 1; i <= 24; ++i)
    {
        double r = dom.radius() * i / 24;
        for (int j = 0; j < 64; ++j)
        {
            double th = two_pi * j / 64;
            pts.push_back(dom.center() + r * Vec2{std::cos(th), std::sin(th)});
        }
    }
    Eigen::MatrixXd values(pts.size(), k);
    for (size_t p = 0; p < pts.size(); ++p)
    {
        for (int i = 0; i < k; ++i)
            values(p, i) = basis.fields[i](pts[p]);
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    double min_sum = std::numeric_limits<double>::infinity();
    double min_beta = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s)
    {
        Eigen::VectorXd beta(k);
        for (int i = 0; i < k; ++i)
            beta(i) = normal(rng);
        double sup = (values * beta).cwiseAbs().maxCoeff();
        if (!(sup > 0))
            continue;
        beta /= sup;
        min_sum = std::min(min_sum, (a * beta).cwiseAbs().sum());
        min_beta = std::min(min_beta, beta.norm());
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    design.norm_equivalence = min_sum;
    design.norm_equivalence_bound
        = svd.singularValues()(svd.singularValues().size() - 1) * min_beta;
}

//---------------------------------------------------------------------------//
}  // namespace ltid
