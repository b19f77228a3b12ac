//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file Probes.cc
//---------------------------------------------------------------------------//
#include "ltid/Probes.hh"

#include <sstream>
#include <stdexcept>

#include "ltid/Parallel.hh"
#include "ltid/Quadrature.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
void validate(ProbeSpec const& spec, Discretization const& disc)
{
    check_resolution(spec.lambda, disc);
    if (spec.m_tilde < 0 || spec.m_tilde >= disc.angles.M)
    {
        throw std::invalid_argument("detection ordinate is not on the grid");
    }
    if (!spec.phi.inside_collar(disc.domain))
    {
        std::ostringstream os;
        os << "probe bump at (" << spec.phi.center.x << ", "
           << spec.phi.center.y << ") with width " << spec.phi.width
           << " is not inside the collar";
        throw std::invalid_argument(os.str());
    }
    if (spec.kind == ProbeCase::b && !(spec.r > 0 && spec.r < 1))
    {
        throw std::invalid_argument("concentration r must lie in (0, 1)");
    }
}

double probe_amplitude(ProbeSpec const& spec, Vec2 y)
{
    double p = spec.phi(y);
    return spec.squared ? p * p : p;
}

std::vector<double> probe_angular_weights(ProbeSpec const& spec,
                                          AngularGrid const& angles)
{
    if (spec.kind == ProbeCase::a)
        return std::vector<double>(angles.M, 1.0);
    return poisson_weights(angles, spec.r, spec.m_tilde, true);
}

//---------------------------------------------------------------------------//
ProbeInflow::ProbeInflow(ProbeSpec const& spec, Discretization const& disc)
    : spec_(spec)
    , weights_(probe_angular_weights(spec, disc.angles))
    , directions_(disc.angles.directions)
    , T_(disc.time.T)
{
    validate(spec, disc);
}

void ProbeInflow::envelope(int m, std::span<double const> times,
                           std::span<EntryPoint const> points,
                           std::span<Complex> out) const
{
    Vec2 om = directions_[m];
    double a = weights_[m];
    for (size_t i = 0; i < times.size(); ++i)
    {
        double t = times[i];
        if (t < 0 || t > T_ || a == 0)
        {
            out[i] = 0;
            continue;
        }
        out[i] = a * probe_amplitude(spec_, points[i].sigma - t * om);
    }
}

BoundaryFlux make_probe(ProbeSpec const& spec, Discretization const& disc)
{
    validate(spec, disc);
    std::vector<double> a = probe_angular_weights(spec, disc.angles);
    BoundaryFlux f(Side::incoming, disc.time, disc.angles.M,
                   disc.grid.num_boundary());
    f.carrier = spec.lambda;
    for (int n = 0; n < disc.time.levels(); ++n)
    {
        double t = disc.time.t(n);
        for (int m = 0; m < disc.angles.M; ++m)
        {
            Vec2 om = disc.angles.directions[m];
            for (int b : disc.split.incoming[m])
            {
                Vec2 sig = disc.grid.boundary[b].sigma;
                double amp = a[m] * probe_amplitude(spec, sig - t * om);
                if (amp != 0)
                {
                    f.at(n, m, b) = amp
                                    * std::polar(1.0, spec.lambda
                                                          * (t - dot(om, sig)));
                }
            }
        }
    }
    return f;
}

BoundaryFlux make_probe_a(ProbeSpec const& spec, Discretization const& disc)
{
    if (spec.kind != ProbeCase::a)
        throw std::invalid_argument("expected a case-a probe");
    return make_probe(spec, disc);
}

BoundaryFlux make_probe_b(ProbeSpec const& spec, Discretization const& disc)
{
    if (spec.kind != ProbeCase::b)
        throw std::invalid_argument("expected a case-b probe");
    return make_probe(spec, disc);
}

//---------------------------------------------------------------------------//
double line_integral(CoefficientField const& q, Domain const& domain, Vec2 x,
                     Vec2 omega, double t, double max_step)
{
    if (q.is_zero() || t <= 0)
        return 0;
    // Parameters s with x - s*omega in the disk
    double s0 = 0;
    double s1 = 0;
    if (!domain.chord(x, -omega, &s0, &s1))
        return 0;
    double a = std::max(s0, 0.0);
    double b = std::min(s1, t);
    if (b <= a)
        return 0;
    if (auto c = q.constant_value())
        return *c * (b - a);
    return simpson([&](double s) { return q(x - s * omega); }, a, b,
                   max_step);
}

//---------------------------------------------------------------------------//
Ansatz::Ansatz(CoefficientField q, Profile psi, double lambda, AnsatzSign sign,
               Discretization const& disc)
    : q_(std::move(q))
    , psi_(std::move(psi))
    , lambda_(lambda)
    , sign_(sign == AnsatzSign::forward ? 1.0 : -1.0)
    , disc_(disc)
    , chord_once_(std::make_unique<std::once_flag>())
{
}

Complex Ansatz::operator()(int m, double t, Vec2 x) const
{
    Vec2 om = disc_.angles.directions[m];
    double p = psi_(m, x - t * om);
    if (p == 0)
        return 0;
    double att = line_integral(q_, disc_.domain, x, om, t, 0.5 * disc_.grid.h);
    return p * std::exp(-sign_ * att)
           * std::polar(1.0, sign_ * lambda_ * (t - dot(om, x)));
}

PhaseSpaceField Ansatz::slice(double t) const
{
    int M = disc_.angles.M;
    int N = disc_.grid.num_slots();
    std::call_once(*chord_once_, [&] {
        chord_.resize(size_t(M) * N);
        double step = 0.5 * disc_.grid.h;
        parallel_for(M, [&](int m) {
            Vec2 om = disc_.angles.directions[m];
            for (int s = 0; s < N; ++s)
            {
                chord_[size_t(m) * N + s]
                    = line_integral(q_, disc_.domain, disc_.grid.slot_point(s),
                                    om, 1e300, step);
            }
        });
    });
    PhaseSpaceField out(M, N, t);
    parallel_for(M, [&](int m) {
        Vec2 om = disc_.angles.directions[m];
        Complex* row = out.ordinate(m);
        for (int s = 0; s < N; ++s)
        {
            Vec2 x = disc_.grid.slot_point(s);
            double p = psi_(m, x - t * om);
            if (p == 0)
                continue;
            row[s] = p * std::exp(-sign_ * chord_[size_t(m) * N + s])
                     * std::polar(1.0, sign_ * lambda_ * (t - dot(om, x)));
        }
    });
    return out;
}

Ansatz ansatz_fields(CoefficientField const& q, ProbeSpec const& spec,
                     AnsatzSign sign, Discretization const& disc)
{
    validate(spec, disc);
    auto a = probe_angular_weights(spec, disc.angles);
    ProbeSpec sp = spec;
    Ansatz::Profile psi = [a, sp](int m, Vec2 y) {
        return a[m] == 0 ? 0.0 : a[m] * probe_amplitude(sp, y);
    };
    return Ansatz(q, std::move(psi), spec.lambda, sign, disc);
}

Window measurement_window(Bump const& phi, Domain const& domain)
{
    double gap = norm(phi.center - domain.center()) - domain.radius()
                 - phi.width;
    if (!(gap > 0))
    {
        throw std::invalid_argument("bump support touches the domain");
    }
    return Window{phi.center, phi.width, phi.width + 0.9 * gap};
}

//---------------------------------------------------------------------------//
RemainderRecord remainder(Discretization const& disc,
                          CoefficientField const& q,
                          AngularKernel const& kernel, ProbeSpec const& spec,
                          SolveOptions const& options, ProbeData data)
{
    Ansatz phi = ansatz_fields(q, spec, AnsatzSign::forward, disc);
    RemainderRecord rec;
    rec.lambda = spec.lambda;
    rec.h = disc.grid.h;
    SolveOptions opts = options;
    opts.trajectory_stride = 0;
    opts.observer = [&](int, PhaseSpaceField const& u) {
        PhaseSpaceField r = phi.slice(u.t);
        rec.ansatz_norm = std::max(rec.ansatz_norm,
                                   l2_norm(r, disc.angles, disc.grid));
        for (size_t i = 0; i < r.values.size(); ++i)
            r.values[i] = u.values[i] - r.values[i];
        rec.norm = std::max(rec.norm, l2_norm(r, disc.angles, disc.grid));
        rec.direction_norm = std::max(
            rec.direction_norm, l2_norm_ordinate(r, disc.grid, spec.m_tilde));
    };
    if (data == ProbeData::sampled)
        forward_solve(disc, q, kernel, make_probe(spec, disc), opts);
    else
        forward_solve(disc, q, kernel, ProbeInflow(spec, disc), opts);
    return rec;
}

std::vector<RemainderRecord>
remainder_ladder(Discretization const& disc, CoefficientField const& q,
                 AngularKernel const& kernel, ProbeSpec const& spec,
                 std::vector<double> const& lambdas,
                 SolveOptions const& options, ProbeData data)
{
    for (double lambda : lambdas)
        check_resolution(lambda, disc);
    std::vector<RemainderRecord> out;
    for (double lambda : lambdas)
    {
        ProbeSpec sp = spec;
        sp.lambda = lambda;
        out.push_back(remainder(disc, q, kernel, sp, options, data));
    }
    return out;
}

//---------------------------------------------------------------------------//
SourceProfile case_b_source(CoefficientField const& q,
                            AngularKernel const& kernel, ProbeSpec const& spec,
                            Discretization const& disc)
{
    if (kernel.terms().size() != 1)
    {
        throw std::invalid_argument("case-b source needs a separable kernel");
    }
    SourceProfile z;
    int M = disc.angles.M;
    z.angular.resize(M);
    for (int m = 0; m < M; ++m)
        z.angular[m] = kernel.terms().front().table(m, spec.m_tilde);

    SpatialGrid const& g = disc.grid;
    int N = g.num_slots();
    Vec2 wt = disc.angles.directions[spec.m_tilde];
    std::vector<double> base(N);
    std::vector<double> along(N);
    std::vector<Vec2> pts(N);
    CoefficientField const& c = kernel.terms().front().c;
    for (int s = 0; s < N; ++s)
    {
        Vec2 x = g.slot_point(s);
        pts[s] = x;
        // Nonzero only once x - t*wt has left the disk: full chord
        double chord = line_integral(q, disc.domain, x, wt, 1e300,
                                     0.5 * g.h);
        base[s] = c(x) * std::exp(chord);
        along[s] = dot(x, wt);
    }
    Bump phi = spec.phi;
    z.spatial = [=](double lambda, double t, std::span<Complex> out) {
        for (int s = 0; s < N; ++s)
        {
            double p = base[s] == 0 ? 0.0 : phi(pts[s] - t * wt);
            out[s] = p == 0 ? Complex{}
                            : base[s] * p * std::polar(1.0, lambda * along[s]);
        }
    };
    return z;
}

namespace
{
//---------------------------------------------------------------------------//
//! q exp(-i lambda t) a(m) z(t, x) with z tabulated on every level
class TabulatedSource final : public VolumeSource
{
  public:
    TabulatedSource(std::vector<double> q, std::vector<double> angular,
                    std::vector<Complex> table, double lambda, int slots)
        : q_(std::move(q))
        , angular_(std::move(angular))
        , table_(std::move(table))
        , lambda_(lambda)
        , slots_(slots)
    {
    }

    void evaluate(int n, double t, int m, std::span<Complex> out) const final
    {
        double a = angular_[m];
        if (a == 0)
            return;
        Complex f = a * std::polar(1.0, -lambda_ * t);
        Complex const* z = table_.data() + size_t(n) * slots_;
        for (int s = 0; s < slots_; ++s)
            out[s] += f * q_[s] * z[s];
    }

  private:
    std::vector<double> q_;
    std::vector<double> angular_;
    std::vector<Complex> table_;
    double lambda_;
    int slots_;
};

//---------------------------------------------------------------------------//
}  // namespace

std::vector<WeakDecayRecord>
weak_time_decay(Discretization const& disc, CoefficientField const& q,
                AngularKernel const& kernel, SourceProfile const& Z,
                std::vector<double> const& lambdas,
                SolveOptions const& options)
{
    SpatialGrid const& g = disc.grid;
    TimeGrid const& tg = disc.time;
    int N = g.num_slots();
    for (double lambda : lambdas)
        check_resolution(lambda, disc);
    std::vector<double> qs(N);
    for (int s = 0; s < N; ++s)
        qs[s] = q(g.slot_point(s));

    std::vector<WeakDecayRecord> out;
    for (double lambda : lambdas)
    {
        std::vector<Complex> table(size_t(tg.levels()) * N);
        for (int n = 0; n < tg.levels(); ++n)
        {
            Z.spatial(lambda, tg.t(n),
                      std::span<Complex>(table.data() + size_t(n) * N, N));
        }
        double zmax = 0;
        for (int s = 0; s < N; ++s)
            zmax = std::max(zmax, std::abs(table[size_t(tg.steps) * N + s]));
        if (zmax > 1e-10)
        {
            std::ostringstream os;
            os << "source profile does not vanish at the horizon (max |Z(T)| "
               << zmax << ")";
            throw std::invalid_argument(os.str());
        }
        TabulatedSource src(qs, Z.angular, std::move(table), lambda, N);

        WeakDecayRecord rec;
        rec.lambda = lambda;
        PhaseSpaceField w(disc.angles.M, N);
        PhaseSpaceField prev;
        SolveOptions opts = options;
        opts.source = &src;
        opts.trajectory_stride = 0;
        opts.record_ordinates = {0};
        if (!opts.carrier)
            opts.carrier = -lambda;
        opts.observer = [&](int, PhaseSpaceField const& v) {
            rec.s_norm = std::max(rec.s_norm,
                                  l2_norm(v, disc.angles, disc.grid));
            if (!prev.values.empty())
            {
                // Levels arrive from T downwards: w(t_n) = w(t_{n+1}) + ...
                for (size_t i = 0; i < w.values.size(); ++i)
                    w.values[i] += 0.5 * tg.dt * (prev.values[i] + v.values[i]);
                rec.w_norm = std::max(rec.w_norm,
                                      l2_norm(w, disc.angles, disc.grid));
            }
            prev = v;
        };
        adjoint_solve(disc, q, kernel, FunctionInflow([](double, int, Vec2) {
                          return Complex{};
                      }),
                      opts);
        out.push_back(rec);
    }
    return out;
}

//---------------------------------------------------------------------------//
}  // namespace ltid
