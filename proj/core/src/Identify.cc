//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file Identify.cc
//---------------------------------------------------------------------------//
#include "ltid/Identify.hh"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ltid/Parallel.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
std::vector<ProbeSpec> design_probes(DesignResult const& design, double lambda,
                                     double r)
{
    std::vector<ProbeSpec> out;
    for (int j = 0; j < design.k(); ++j)
    {
        ProbeSpec p;
        p.kind = design.kind;
        p.phi = design.bumps[j];
        p.lambda = lambda;
        p.m_tilde = design.directions[j];
        p.r = r;
        p.squared = design.kind == ProbeCase::a;
        out.push_back(p);
    }
    return out;
}

MeasurementSet simulate_measurements(Discretization const& disc,
                                     CoefficientField const& q,
                                     AngularKernel const& kernel,
                                     std::vector<ProbeSpec> const& probes,
                                     SolveOptions const& options)
{
    MeasurementSet set;
    for (auto const& p : probes)
    {
        SolveOptions opts = options;
        opts.record_ordinates = {p.m_tilde};
        opts.trajectory_stride = 0;
        auto res = forward_solve(disc, q, kernel, ProbeInflow(p, disc), opts);
        set.records.push_back({p, std::move(res.trace)});
    }
    return set;
}

//---------------------------------------------------------------------------//
BoundaryFlux subsample(BoundaryFlux const& fine, Discretization const& coarse)
{
    TimeGrid const& ft = fine.time();
    TimeGrid const& ct = coarse.time;
    int rt = ct.steps > 0 ? ft.steps / ct.steps : 0;
    int rb = fine.Nb() / coarse.grid.num_boundary();
    if (rt < 1 || rt * ct.steps != ft.steps
        || std::abs(rt * ft.dt - ct.dt) > 1e-12 * ct.dt
        || rb * coarse.grid.num_boundary() != fine.Nb()
        || fine.M() != coarse.angles.M)
    {
        throw std::invalid_argument("fine flux is not a refinement of the "
                                    "coarse grid");
    }
    BoundaryFlux out(fine.side(), ct, fine.M(), coarse.grid.num_boundary(),
                     fine.ordinates());
    out.carrier = fine.carrier;
    for (int n = 0; n < ct.levels(); ++n)
    {
        for (int m : fine.ordinates())
        {
            for (int b = 0; b < out.Nb(); ++b)
                out.at(n, m, b) = fine.at(rt * n, m, rb * b);
        }
    }
    out.restrict_to_side(coarse.split);
    return out;
}

MeasurementSet subsample(MeasurementSet const& fine,
                         Discretization const& coarse)
{
    MeasurementSet out;
    out.provenance = fine.provenance;
    out.noise = fine.noise;
    for (auto const& r : fine.records)
        out.records.push_back({r.probe, subsample(r.flux, coarse)});
    return out;
}

void add_noise(MeasurementSet& set, double level, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    double scale = level / std::sqrt(2.0);
    for (auto& r : set.records)
    {
        for (auto& v : r.flux.values())
        {
            double a = normal(rng);
            double b = normal(rng);
            v *= Complex{1 + scale * a, scale * b};
        }
    }
    set.noise = level;
}

//---------------------------------------------------------------------------//
BoundaryFlux outgoing_weight(Ansatz const& psi, int m,
                             Discretization const& disc)
{
    BoundaryFlux w(Side::outgoing, disc.time, disc.angles.M,
                   disc.grid.num_boundary(), {m});
    auto const& nodes = disc.split.outgoing[m];
    parallel_for(disc.time.levels(), [&](int n) {
        double t = disc.time.t(n);
        for (int b : nodes)
            w.at(n, m, b) = psi(m, t, disc.grid.boundary[b].sigma);
    });
    return w;
}

Complex measurement_functional(BoundaryFlux const& measured,
                               BoundaryFlux const& simulated,
                               BoundaryFlux const& weight, int m,
                               Discretization const& disc)
{
    TimeGrid const& tg = disc.time;
    for (auto const* f : {&measured, &simulated, &weight})
    {
        if (f->side() != Side::outgoing || !f->records(m)
            || f->Nb() != disc.grid.num_boundary()
            || f->time().steps != tg.steps
            || std::abs(f->time().dt - tg.dt) > 1e-12 * tg.dt)
        {
            throw std::invalid_argument(
                "measurement fluxes do not share the solver grid");
        }
    }
    Complex sum{};
    for (int n = 0; n < tg.levels(); ++n)
    {
        Complex level{};
        for (int b : disc.split.outgoing[m])
        {
            level += disc.split.w(m, b)
                     * (measured.at(n, m, b) - simulated.at(n, m, b))
                     * weight.at(n, m, b);
        }
        sum += tg.weight(n) * level;
    }
    return sum;
}

double coherent_fraction(ProbeSpec const& spec, AngularGrid const& angles)
{
    return angles.weights[spec.m_tilde]
           * probe_angular_weights(spec, angles)[spec.m_tilde];
}

namespace
{
//---------------------------------------------------------------------------//
void check_inputs(MeasurementSet const& meas, DesignResult const& design,
                  Basis const& basis, ProbeCase kind,
                  IdentifyOptions const& options)
{
    if (design.kind != kind)
        throw std::invalid_argument("design is for the other probe case");
    if (design.system().cols() != basis.k())
        throw std::invalid_argument("design does not match the basis");
    double cond = kind == ProbeCase::b ? design.cond_B : design.cond;
    if (design.singular || !(cond <= options.cond_threshold))
    {
        std::ostringstream os;
        os << "design condition number " << cond << " exceeds "
           << options.cond_threshold;
        throw std::invalid_argument(os.str());
    }
    if (static_cast<int>(meas.records.size()) != design.k())
        throw std::invalid_argument("need one measurement per design probe");
    for (int j = 0; j < design.k(); ++j)
    {
        auto const& r = meas.records[j];
        if (r.probe.m_tilde != design.directions[j]
            || r.probe.kind != kind || !r.flux.records(r.probe.m_tilde))
        {
            std::ostringstream os;
            os << "measurement " << j << " does not match its design probe";
            throw std::invalid_argument(os.str());
        }
    }
}

using Evaluate = std::function<Eigen::VectorXd(Eigen::VectorXd const&)>;

//! Shared fixed-point driver: m(beta) -> S delta = m -> beta += delta
void iterate(Evaluate const& evaluate, Eigen::MatrixXd const& system,
             IdentifyOptions const& options, int M, ReconstructionResult& res)
{
    double tol = options.tol > 0 ? options.tol : 1e-4 * M;
    auto solver = system.colPivHouseholderQr();
    int rising = 0;
    bool pending = false;
    res.status = ReconstructionStatus::max_iterations;
    for (int it = 0;; ++it)
    {
        Eigen::VectorXd m = evaluate(res.beta);
        double resid = m.norm();
        if (!res.residuals.empty() && resid > res.residuals.back())
            ++rising;
        else
            rising = 0;
        res.residuals.push_back(resid);
        if (pending)
        {
            res.status = ReconstructionStatus::converged;
            return;
        }
        if (rising >= 3)
        {
            res.status = ReconstructionStatus::diverged;
            return;
        }
        if (res.iterations >= options.max_iter)
            return;
        Eigen::VectorXd delta = solver.solve(m);
        double step = delta.cwiseAbs().maxCoeff();
        res.updates.push_back(step);
        if (step == 0)
        {
            res.status = ReconstructionStatus::converged;
            return;
        }
        res.beta += delta;
        ++res.iterations;
        // Evaluate once more so the reported residual belongs to beta
        pending = step < tol;
    }
}

Ansatz::Profile single_ordinate(int m_tilde, std::function<double(Vec2)> f)
{
    return [m_tilde, f = std::move(f)](int m, Vec2 y) {
        return m == m_tilde ? f(y) : 0.0;
    };
}

Eigen::VectorXd initial_beta(IdentifyOptions const& options, int k)
{
    if (options.initial.size() == 0)
        return Eigen::VectorXd::Zero(k);
    if (options.initial.size() != k)
        throw std::invalid_argument("initial coefficient vector length");
    return options.initial;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now()
                                         - t0)
        .count();
}

//---------------------------------------------------------------------------//
}  // namespace

ReconstructionResult reconstruct_q(MeasurementSet const& measurements,
                                   DesignResult const& design,
                                   Basis const& basis,
                                   AngularKernel const& kernel,
                                   Discretization const& disc,
                                   IdentifyOptions const& options)
{
    auto t0 = std::chrono::steady_clock::now();
    check_inputs(measurements, design, basis, ProbeCase::a, options);
    int k = design.k();
    ReconstructionResult res;
    res.mode = options.mode;
    res.lambda = measurements.records.front().probe.lambda;
    res.beta = initial_beta(options, k);

    if (options.mode == ReconstructionMode::ballistic)
    {
        // -log |A[f]| / |A_0[f]| along the chord, weighted by |A_0[f]| = phi^2
        Eigen::VectorXd m(k);
        for (int j = 0; j < k; ++j)
        {
            auto const& rec = measurements.records[j];
            int mt = rec.probe.m_tilde;
            SolveOptions opts = options.solve;
            opts.record_ordinates = {mt};
            auto ref = forward_solve(disc, CoefficientField{}, AngularKernel{},
                                     ProbeInflow(rec.probe, disc), opts)
                           .trace;
            double peak = 0;
            for (auto const& v : ref.values())
                peak = std::max(peak, std::abs(v));
            double sum = 0;
            for (int n = 0; n < disc.time.levels(); ++n)
            {
                for (int b : disc.split.outgoing[mt])
                {
                    double a0 = std::abs(ref.at(n, mt, b));
                    if (!(a0 > 1e-6 * peak))
                        continue;
                    double ratio = std::abs(rec.flux.at(n, mt, b)) / a0;
                    if (!(ratio > 0) || !std::isfinite(ratio))
                    {
                        std::ostringstream os;
                        os << "nonpositive amplitude ratio for probe " << j
                           << " at level " << n << ", boundary node " << b;
                        throw std::invalid_argument(os.str());
                    }
                    sum += disc.time.weight(n) * disc.split.w(mt, b) * a0
                           * -std::log(ratio);
                }
            }
            m(j) = sum;
        }
        res.beta = design.A.colPivHouseholderQr().solve(m);
        res.residuals.push_back((design.A * res.beta - m).norm());
        res.updates.push_back(res.beta.cwiseAbs().maxCoeff());
        res.iterations = 1;
        res.status = ReconstructionStatus::converged;
        res.wall_seconds = seconds_since(t0);
        return res;
    }

    Evaluate evaluate = [&](Eigen::VectorXd const& beta) {
        CoefficientField q = combine(basis, beta);
        Eigen::VectorXd m(k);
        for (int j = 0; j < k; ++j)
        {
            auto const& rec = measurements.records[j];
            int mt = rec.probe.m_tilde;
            SolveOptions opts = options.solve;
            opts.record_ordinates = {mt};
            auto sim = forward_solve(disc, q, kernel,
                                     ProbeInflow(rec.probe, disc), opts);
            Window win = measurement_window(rec.probe.phi, disc.domain);
            Ansatz psi(q, single_ordinate(mt, win), rec.probe.lambda,
                       AnsatzSign::adjoint, disc);
            BoundaryFlux w = outgoing_weight(psi, mt, disc);
            // Larger q lowers the measured flux: m = int (sim - meas) Psi
            m(j) = -measurement_functional(rec.flux, sim.trace, w, mt, disc)
                        .real();
        }
        return m;
    };
    iterate(evaluate, design.A, options, disc.angles.M, res);
    res.wall_seconds = seconds_since(t0);
    return res;
}

ReconstructionResult reconstruct_c(MeasurementSet const& measurements,
                                   DesignResult const& design,
                                   Basis const& basis,
                                   CoefficientField const& q,
                                   AngularKernel const& kernel,
                                   Discretization const& disc,
                                   IdentifyOptions const& options)
{
    auto t0 = std::chrono::steady_clock::now();
    if (options.mode != ReconstructionMode::iterative)
        throw std::invalid_argument("ballistic mode applies to q only");
    check_inputs(measurements, design, basis, ProbeCase::b, options);
    if (kernel.terms().size() != 1)
        throw std::invalid_argument("reconstruct_c needs a separable kernel");
    int k = design.k();
    ReconstructionResult res;
    res.mode = options.mode;
    res.lambda = measurements.records.front().probe.lambda;
    res.r = measurements.records.front().probe.r;
    res.beta = initial_beta(options, k);

    // Only the fraction of the probe on the detection ordinate scatters
    // coherently into it
    Eigen::MatrixXd system = design.B;
    for (int j = 0; j < k; ++j)
    {
        system.row(j)
            *= coherent_fraction(measurements.records[j].probe, disc.angles);
    }

    std::vector<BoundaryFlux> weights;
    for (auto const& rec : measurements.records)
    {
        ProbeSpec p = rec.probe;
        Bump phi = p.phi;
        Ansatz psi(q, single_ordinate(p.m_tilde, phi), p.lambda,
                   AnsatzSign::adjoint, disc);
        weights.push_back(outgoing_weight(psi, p.m_tilde, disc));
    }

    Evaluate evaluate = [&](Eigen::VectorXd const& beta) {
        AngularKernel trial = kernel.with_coefficient(combine(basis, beta));
        Eigen::VectorXd m(k);
        for (int j = 0; j < k; ++j)
        {
            auto const& rec = measurements.records[j];
            int mt = rec.probe.m_tilde;
            SolveOptions opts = options.solve;
            opts.record_ordinates = {mt};
            auto sim = forward_solve(disc, q, trial,
                                     ProbeInflow(rec.probe, disc), opts);
            m(j) = measurement_functional(rec.flux, sim.trace, weights[j], mt,
                                          disc)
                       .real();
        }
        return m;
    };
    iterate(evaluate, system, options, disc.angles.M, res);
    res.wall_seconds = seconds_since(t0);
    return res;
}

//---------------------------------------------------------------------------//
}  // namespace ltid
