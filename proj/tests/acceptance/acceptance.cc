//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file acceptance.cc
//! Runs the acceptance criteria and prints one PASS/FAIL line for each.
//!
//! Usage: ltid_acceptance [criterion ...]
//---------------------------------------------------------------------------//
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ltid/Albedo.hh"
#include "ltid/Design.hh"
#include "ltid/Identify.hh"
#include "ltid/Probes.hh"

#include "TestData.hh"

using namespace ltid;
using namespace ltid::test;

namespace
{
//---------------------------------------------------------------------------//
struct Outcome
{
    bool pass{false};
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Domain const& disk()
{
    static Domain const d = Domain::unit_disk(2.4);
    return d;
}

Discretization grid(double h, int M)
{
    return make_discretization(disk(), GridSpec{h, 0, M});
}

CoefficientField constant(double v)
{
    return CoefficientField::constant(v).interior(disk());
}

AngularKernel isotropic(double c, AngularGrid const& angles)
{
    return AngularKernel::separable(constant(c), isotropic_phase(), angles);
}

double rel_error(BoundaryFlux const& a, BoundaryFlux const& exact,
                 Discretization const& disc)
{
    BoundaryFlux d = a;
    for (size_t i = 0; i < d.values().size(); ++i)
        d.values()[i] -= exact.values()[i];
    return flux_norm(d, disc) / flux_norm(exact, disc);
}

double rel_sup(Eigen::VectorXd const& a, Eigen::VectorXd const& b)
{
    return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

std::string vec(Eigen::VectorXd const& v)
{
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < v.size(); ++i)
        os << (i ? ", " : "") << v(i);
    os << ")";
    return os.str();
}

template<class... Args>
std::string format(char const* fmt, Args... args)
{
    char buf[1024];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    return buf;
}

//---------------------------------------------------------------------------//
Outcome vacuum_exactness()
{
    auto t0 = Clock::now();
    auto f = [](double t, int, Vec2 s) -> Complex {
        return pulse(t, 0.1, 0.9) * (1.5 + std::cos(std::atan2(s.y, s.x)));
    };
    std::vector<double> err;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64})
    {
        auto disc = grid(h, 64);
        auto out = albedo(disc, {}, {}, sampled_inflow(disc, f));
        err.push_back(rel_error(out, vacuum_outflow(disc, f), disc));
    }
    double p1 = std::log2(err[0] / err[1]);
    double p2 = std::log2(err[1] / err[2]);
    double sec = since(t0);
    Outcome o;
    o.pass = err[2] <= 0.02 && p1 >= 1.9 && p2 >= 1.9 && sec <= 60;
    o.detail = format("errors %.3e %.3e %.3e, orders %.2f %.2f, %.1f s",
                      err[0], err[1], err[2], p1, p2, sec);
    return o;
}

Outcome positivity()
{
    auto disc = grid(1.0 / 32, 32);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uni(0, 1);
    double lowest = 0;
    for (int run = 0; run < 10; ++run)
    {
        double a = uni(rng), b = uni(rng), c = uni(rng), d = uni(rng);
        CoefficientField q([a, b](Vec2 x) {
            return a * (1 + std::sin(3 * x.x + 5 * b) * std::cos(2 * x.y));
        });
        CoefficientField cs([c](Vec2 x) { return c * (1 + x.x * x.y); });
        auto k = AngularKernel::separable(cs.interior(disk()),
                                          isotropic_phase(), disc.angles);
        auto in = sampled_inflow(disc, [d](double t, int m, Vec2 s) {
            return Complex(pulse(t, 0.05 + 0.2 * d, 0.8)
                               * (1 + std::cos(4 * s.y + m * d)),
                           0);
        });
        SolveOptions opts;
        opts.interpolation = Interpolation::bilinear;
        opts.observer = [&](int, PhaseSpaceField const& u) {
            for (auto v : u.values)
                lowest = std::min(lowest, v.real());
        };
        forward_solve(disc, q.interior(disk()), k, in, opts);
    }
    return {lowest >= -1e-12, format("trajectory minimum %.3e", lowest)};
}

Outcome kernel_bound()
{
    auto disc = grid(1.0 / 16, 32);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(-1, 1);
    int violations = 0;
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial)
    {
        double g = 0.9 * uni(rng);
        double a = 0.6 + 0.3 * uni(rng);
        double b = 0.3 * uni(rng);
        CoefficientField c([a, b](Vec2 x) { return a + b * x.x * x.x; });
        auto k = AngularKernel::separable(c.interior(disk()),
                                          henyey_greenstein(g), disc.angles);
        auto bounds = kernel_bounds(k, disc.angles, disc.grid);
        PhaseSpaceField u(disc.angles.M, disc.grid.num_slots());
        for (auto& v : u.values)
            v = Complex(uni(rng), uni(rng));
        double lhs
            = l2_norm(scatter_apply(k, disc.angles, disc.grid, u), disc.angles,
                      disc.grid);
        double rhs = std::max(bounds.M1, bounds.M2)
                     * l2_norm(u, disc.angles, disc.grid);
        violations += lhs > rhs;
        worst = std::max(worst, lhs / rhs);
    }
    return {violations == 0,
            format("%d violations, largest ratio %.3f", violations, worst)};
}

Outcome duality()
{
    auto t0 = Clock::now();
    std::vector<double> gap;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64})
    {
        auto disc = grid(h, 32);
        auto f = smooth_inflow(disc);
        auto g = smooth_outflow(disc);
        auto q = constant(0.5);
        auto k = isotropic(1.0, disc.angles);
        Complex ref = flux_pairing(albedo(disc, q, k, f), g, disc);
        gap.push_back(std::abs(duality_gap(disc, q, k, f, g)) / std::abs(ref));
    }
    double p1 = std::log2(gap[0] / gap[1]);
    double p2 = std::log2(gap[1] / gap[2]);
    double sec = since(t0);
    return {p1 >= 0.9 && p2 >= 0.9 && sec <= 300,
            format("relative gaps %.3e %.3e %.3e, orders %.2f %.2f, %.1f s",
                   gap[0], gap[1], gap[2], p1, p2, sec)};
}

Outcome collision_identity()
{
    std::vector<double> res;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64})
    {
        auto disc = grid(h, 16);
        auto f = smooth_inflow(disc);
        auto g = smooth_outflow(disc);
        auto r = collision_identity_residual(disc, constant(0.3), {},
                                             constant(0.5), {}, f, g);
        res.push_back(std::abs(r.residual) / std::abs(r.boundary));
    }
    double p1 = std::log2(res[0] / res[1]);
    double p2 = std::log2(res[1] / res[2]);
    return {p1 >= 0.9 && p2 >= 0.9,
            format("relative residuals %.3e %.3e %.3e, orders %.2f %.2f",
                   res[0], res[1], res[2], p1, p2)};
}

ProbeSpec ladder_probe(ProbeCase kind)
{
    ProbeSpec p;
    p.kind = kind;
    p.phi = Bump{{1.1, 0.0}, 0.09, 1.0};
    p.m_tilde = 32;
    p.squared = kind == ProbeCase::a;
    return p;
}

Outcome remainder_decay()
{
    auto t0 = Clock::now();
    auto disc = grid(1.0 / 64, 64);
    SolveOptions opts;
    opts.interpolation = Interpolation::bicubic;
    auto q = constant(0.5);
    auto spec = ladder_probe(ProbeCase::a);
    auto lad = remainder_ladder(disc, q, isotropic(0.2, disc.angles), spec,
                                {10, 20, 40}, opts);
    bool decreasing = lad[1].norm < lad[0].norm && lad[2].norm < lad[1].norm;

    // Without scattering, against the free-streaming error of the same probe
    spec.lambda = 40;
    auto k0 = remainder(disc, q, {}, spec, opts, ProbeData::sampled);
    auto vac = remainder(disc, {}, {}, spec, opts, ProbeData::sampled);
    double ratio = k0.norm / vac.norm;
    double sec = since(t0);
    return {decreasing && ratio <= 3 && sec <= 600,
            format("norms %.3e %.3e %.3e (direction %.3e %.3e %.3e), "
                   "no-scattering/vacuum %.2f, %.1f s",
                   lad[0].norm, lad[1].norm, lad[2].norm,
                   lad[0].direction_norm, lad[1].direction_norm,
                   lad[2].direction_norm, ratio, sec)};
}

Outcome weak_decay()
{
    auto disc = grid(1.0 / 64, 64);
    SolveOptions opts;
    opts.interpolation = Interpolation::bicubic;
    auto q = constant(0.5);
    auto k = isotropic(0.2, disc.angles);
    auto z = case_b_source(q, k, ladder_probe(ProbeCase::b), disc);
    auto rec = weak_time_decay(disc, q, k, z, {10, 20, 40}, opts);
    bool decreasing = rec[1].w_norm < rec[0].w_norm
                      && rec[2].w_norm < rec[1].w_norm;
    double smax = 0;
    double smin = 1e300;
    for (auto const& r : rec)
    {
        smax = std::max(smax, r.s_norm);
        smin = std::min(smin, r.s_norm);
    }
    return {decreasing && smax / smin <= 1.5,
            format("w %.3e %.3e %.3e, S %.3e %.3e %.3e (max/min %.3f)",
                   rec[0].w_norm, rec[1].w_norm, rec[2].w_norm, rec[0].s_norm,
                   rec[1].s_norm, rec[2].s_norm, smax / smin)};
}

//! Tensor trapezoid of phi^2 times closed-form chord moments of {1, x1, x2}
Eigen::Vector3d dense_design_row(Bump const& phi, Vec2 om)
{
    constexpr int n = 800;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    double step = 2 * phi.width / n;
    for (int i = 0; i <= n; ++i)
    {
        for (int j = 0; j <= n; ++j)
        {
            Vec2 y = phi.center
                     + Vec2{-phi.width + i * step, -phi.width + j * step};
            double p = phi(y);
            double b = dot(y, om);
            double d = b * b - dot(y, y) + 1;
            if (p == 0 || d <= 0)
                continue;
            double len = 2 * std::sqrt(d);
            Vec2 mid = y - b * om;
            sum += p * p * len * Eigen::Vector3d(1, mid.x, mid.y);
        }
    }
    return sum * step * step;
}

Outcome design_certificate()
{
    Basis basis = default_basis(disk());
    auto angles = build_angular_grid(64);
    DesignOptions opts;
    opts.cond_threshold = 1e3;
    DesignResult d;
    try
    {
        d = select_design(basis, angles, opts);
    }
    catch (std::exception const& e)
    {
        return {false, e.what()};
    }
    certify_norm_equivalence(d, basis);
    double worst = 0;
    for (int j = 0; j < d.k(); ++j)
    {
        auto oracle = dense_design_row(d.bumps[j],
                                       angles.directions[d.directions[j]]);
        double scale = oracle.cwiseAbs().maxCoeff();
        for (int i = 0; i < 3; ++i)
            worst = std::max(worst, std::abs(d.A(j, i) - oracle(i)) / scale);
    }
    return {d.cond <= 1e3 && worst <= 1e-6,
            format("cond %.3f, oracle deviation %.2e, norm equivalence "
                   "%.3e >= %.3e",
                   d.cond, worst, d.norm_equivalence,
                   d.norm_equivalence_bound)};
}

//---------------------------------------------------------------------------//
struct RoundtripQ
{
    ReconstructionResult result;
    DesignResult design;
    double seconds{0};
};

RoundtripQ roundtrip_q(CoefficientField const& q_true)
{
    auto t0 = Clock::now();
    Basis basis = default_basis(disk());
    auto disc = grid(1.0 / 64, 64);
    auto fine = make_discretization(disk(), refine(disc));
    DesignOptions dopts;
    dopts.cond_threshold = 1e3;
    RoundtripQ rt;
    rt.design = select_design(basis, disc.angles, dopts);
    auto probes = design_probes(rt.design, 40);
    SolveOptions so;
    so.interpolation = Interpolation::bicubic;
    auto meas = subsample(simulate_measurements(fine, q_true,
                                                isotropic(0.2, fine.angles),
                                                probes, so),
                          disc);
    IdentifyOptions io;
    io.solve = so;
    rt.result = reconstruct_q(meas, rt.design, basis,
                              isotropic(0.2, disc.angles), disc, io);
    rt.seconds = since(t0);
    return rt;
}

Outcome identify_q()
{
    Eigen::VectorXd truth(3);
    truth << 0.3, 0.1, 0.0;
    auto rt = roundtrip_q(combine(default_basis(disk()), truth));
    auto const& r = rt.result;
    double err = rel_sup(r.beta, truth);
    return {r.status == ReconstructionStatus::converged && err <= 0.05
                && r.iterations <= 10 && rt.seconds <= 900,
            format("beta %s, error %.2e, %d iterations, %.1f s",
                   vec(r.beta).c_str(), err, r.iterations, rt.seconds)};
}

Outcome identify_c()
{
    Basis basis = default_basis(disk());
    auto disc = grid(1.0 / 64, 64);
    auto fine = make_discretization(disk(), refine(disc));
    auto q = constant(0.5);
    Eigen::VectorXd truth(3);
    truth << 0.2, 0.0, 0.1;
    auto c_true = combine(basis, truth);
    SolveOptions so;
    so.interpolation = Interpolation::bicubic;

    bool pass = true;
    std::string detail;
    struct Case
    {
        char const* name;
        PhaseFunction h;
        double tol;
    };
    for (auto const& c : {Case{"isotropic", isotropic_phase(), 0.10},
                          Case{"g=0.5", henyey_greenstein(0.5), 0.15}})
    {
        auto t0 = Clock::now();
        auto kernel = AngularKernel::separable(c_true, c.h, disc.angles);
        CaseBData cb{q, kernel};
        DesignOptions dopts;
        dopts.kind = ProbeCase::b;
        dopts.cond_threshold = 1e3;
        auto design = select_design(basis, disc.angles, dopts, &cb);
        auto probes = design_probes(design, 40, 0.99);
        auto meas = subsample(
            simulate_measurements(
                fine, q, AngularKernel::separable(c_true, c.h, fine.angles),
                probes, so),
            disc);
        IdentifyOptions io;
        io.solve = so;
        auto r = reconstruct_c(meas, design, basis, q, kernel, disc, io);
        double err = rel_sup(r.beta, truth);
        pass = pass && r.status == ReconstructionStatus::converged
               && err <= c.tol;
        detail += format("%s%s: beta %s, error %.2e, %d iterations, %.1f s",
                         detail.empty() ? "" : "; ", c.name,
                         vec(r.beta).c_str(), err, r.iterations, since(t0));
    }
    return {pass, detail};
}

Outcome gauge()
{
    Basis basis = default_basis(disk());
    // 0.1 (|x|^2 - 1/2) is L2-orthogonal to {1, x1, x2} on the unit disk
    CoefficientField q_true([](Vec2 x) {
        return 0.3 + 0.1 * x.x + 0.1 * (dot(x, x) - 0.5);
    });
    q_true = q_true.interior(disk());
    Eigen::VectorXd target = project_to_span(q_true, basis);
    auto rt = roundtrip_q(q_true);
    double err = rel_sup(rt.result.beta, target);

    // What exact ray data would give: A^{-1} of the design integrals of q
    auto angles = build_angular_grid(64);
    Eigen::VectorXd rays(rt.design.k());
    for (int j = 0; j < rt.design.k(); ++j)
    {
        rays(j) = design_entry(q_true, disk(),
                               angles.directions[rt.design.directions[j]],
                               rt.design.bumps[j]);
    }
    Eigen::VectorXd ray_beta = rt.design.A.colPivHouseholderQr().solve(rays);
    return {rt.result.status == ReconstructionStatus::converged
                && err <= 0.05,
            format("beta %s, L2 projection %s, error %.2e; ray-data "
                   "solution %s, deviation %.2e",
                   vec(rt.result.beta).c_str(), vec(target).c_str(), err,
                   vec(ray_beta).c_str(), rel_sup(rt.result.beta, ray_beta))};
}

//---------------------------------------------------------------------------//
}  // namespace

int main(int argc, char** argv)
{
    struct Criterion
    {
        int id;
        char const* name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> all{
        {1, "vacuum exactness", vacuum_exactness},
        {2, "positivity", positivity},
        {3, "kernel bound", kernel_bound},
        {4, "duality", duality},
        {5, "collision identity", collision_identity},
        {6, "remainder decay", remainder_decay},
        {7, "weak-time decay", weak_decay},
        {8, "design certificate", design_certificate},
        {9, "q roundtrip", identify_q},
        {10, "c roundtrip", identify_c},
        {11, "identifiability gauge", gauge},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (auto const& c : all)
    {
        if (!selected.empty() && !selected.count(c.id))
            continue;
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (std::exception const& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("criterion %2d %-22s %s  %s\n", c.id, c.name,
                    o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failures ? EXIT_FAILURE : EXIT_SUCCESS;
}
