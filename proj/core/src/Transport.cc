//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file Transport.cc
//---------------------------------------------------------------------------//
#include "ltid/Transport.hh"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ltid/Parallel.hh"
#include "ltid/Quadrature.hh"

namespace ltid
{
//---------------------------------------------------------------------------//
double l2_norm(PhaseSpaceField const& u, AngularGrid const& angles,
               SpatialGrid const& grid)
{
    double sum = 0;
    for (int m = 0; m < u.M; ++m)
    {
        Complex const* row = u.ordinate(m);
        double part = 0;
        for (int s = 0; s < u.N; ++s)
            part += grid.volume_weights[s] * std::norm(row[s]);
        sum += angles.weights[m] * part;
    }
    return std::sqrt(sum);
}

double l2_norm_ordinate(PhaseSpaceField const& u, SpatialGrid const& grid,
                        int m)
{
    Complex const* row = u.ordinate(m);
    double sum = 0;
    for (int s = 0; s < u.N; ++s)
        sum += grid.volume_weights[s] * std::norm(row[s]);
    return std::sqrt(sum);
}

//---------------------------------------------------------------------------//
BoundaryFlux::BoundaryFlux(Side side, TimeGrid const& time, int M, int Nb,
                           std::vector<int> ordinates)
    : side_(side), time_(time), M_(M), Nb_(Nb), ordinates_(std::move(ordinates))
{
    if (ordinates_.empty())
    {
        ordinates_.resize(M);
        std::iota(ordinates_.begin(), ordinates_.end(), 0);
    }
    slot_.assign(M, -1);
    for (size_t i = 0; i < ordinates_.size(); ++i)
    {
        int m = ordinates_[i];
        if (m < 0 || m >= M || slot_[m] >= 0)
            throw std::invalid_argument("invalid recorded ordinate list");
        slot_[m] = static_cast<int>(i);
    }
    values_.assign(size_t(time_.levels()) * ordinates_.size() * Nb_, 0.0);
}

void BoundaryFlux::restrict_to_side(BoundarySplit const& split)
{
    int want = side_ == Side::incoming ? -1 : 1;
    for (int n = 0; n < time_.levels(); ++n)
        for (int m : ordinates_)
            for (int b = 0; b < Nb_; ++b)
                if (split.side(m, b) != want)
                    at(n, m, b) = 0;
}

Complex flux_pairing(BoundaryFlux const& a, BoundaryFlux const& b,
                     Discretization const& disc)
{
    if (a.time().steps != b.time().steps || a.Nb() != b.Nb()
        || a.M() != b.M())
    {
        throw std::invalid_argument("flux pairing: mismatched grids");
    }
    Complex sum = 0;
    for (int n = 0; n < a.time().levels(); ++n)
    {
        double tw = a.time().weight(n);
        for (int m : a.ordinates())
        {
            if (!b.records(m))
                continue;
            double wm = disc.angles.weights[m];
            for (int k = 0; k < a.Nb(); ++k)
            {
                double c = disc.split.cos(m, k) * disc.grid.boundary[k].ds;
                sum += tw * wm * c * a.at(n, m, k) * b.at(n, m, k);
            }
        }
    }
    return sum;
}

double flux_norm(BoundaryFlux const& f, Discretization const& disc, double p)
{
    int want = f.side() == Side::incoming ? -1 : 1;
    double sum = 0;
    for (int n = 0; n < f.time().levels(); ++n)
    {
        double tw = f.time().weight(n);
        for (int m : f.ordinates())
        {
            double wm = disc.angles.weights[m];
            for (int b = 0; b < f.Nb(); ++b)
            {
                if (disc.split.side(m, b) != want)
                    continue;
                sum += tw * wm * disc.split.w(m, b)
                       * std::pow(std::abs(f.at(n, m, b)), p);
            }
        }
    }
    return std::pow(sum, 1 / p);
}

//---------------------------------------------------------------------------//
SampledInflow::SampledInflow(BoundaryFlux const& flux,
                             Discretization const& disc)
    : flux_(flux), split_(disc.split), carrier_(flux.carrier)
{
    if (flux.Nb() != disc.grid.num_boundary() || flux.M() != disc.angles.M)
    {
        throw std::invalid_argument("sampled inflow: grid mismatch");
    }
    data_ = flux.values();
    if (carrier_ != 0)
    {
        for (int n = 0; n < flux.time().levels(); ++n)
        {
            double t = flux.time().t(n);
            for (int m : flux.ordinates())
            {
                Vec2 om = disc.angles.directions[m];
                for (int b = 0; b < flux.Nb(); ++b)
                {
                    double ph = t - dot(om, disc.grid.boundary[b].sigma);
                    data_[flux.index(n, m, b)]
                        *= std::polar(1.0, -carrier_ * ph);
                }
            }
        }
    }
}

SampledInflow::Tap SampledInflow::tap(int m, double angle) const
{
    int Nb = flux_.Nb();
    int want = flux_.side() == Side::incoming ? -1 : 1;
    double p = angle * Nb / two_pi;
    double pf = std::floor(p);
    Tap result;
    result.b0 = static_cast<int>(pf) % Nb;
    if (result.b0 < 0)
        result.b0 += Nb;
    result.b1 = (result.b0 + 1) % Nb;
    result.w1 = p - pf;
    result.w0 = 1 - result.w1;
    bool ok0 = split_.side(m, result.b0) == want;
    bool ok1 = split_.side(m, result.b1) == want;
    if (!ok0 && !ok1)
    {
        result.w0 = result.w1 = 0;
    }
    else if (!ok0)
    {
        result.w0 = 0;
        result.w1 = 1;
    }
    else if (!ok1)
    {
        result.w0 = 1;
        result.w1 = 0;
    }
    return result;
}

Complex SampledInflow::evaluate(int m, Tap const& tap, double t) const
{
    TimeGrid const& tg = flux_.time();
    if (t < 0 || t > tg.T * (1 + 1e-12) || !flux_.records(m))
        return 0;
    double u = t / tg.dt;
    int n0 = std::min(static_cast<int>(u), tg.steps - 1);
    double ft = std::min(u - n0, 1.0);
    size_t i0 = flux_.index(n0, m, 0);
    size_t i1 = flux_.index(n0 + 1, m, 0);
    Complex lo = tap.w0 * data_[i0 + tap.b0] + tap.w1 * data_[i0 + tap.b1];
    Complex hi = tap.w0 * data_[i1 + tap.b0] + tap.w1 * data_[i1 + tap.b1];
    return (1 - ft) * lo + ft * hi;
}

void SampledInflow::envelope(int m, std::span<double const> times,
                             std::span<EntryPoint const> points,
                             std::span<Complex> out) const
{
    for (size_t i = 0; i < times.size(); ++i)
        out[i] = evaluate(m, tap(m, points[i].angle), times[i]);
}

void FunctionInflow::envelope(int m, std::span<double const> times,
                              std::span<EntryPoint const> points,
                              std::span<Complex> out) const
{
    for (size_t i = 0; i < times.size(); ++i)
    {
        out[i] = times[i] < 0 ? Complex{} : fn_(times[i], m, points[i].sigma);
    }
}

//---------------------------------------------------------------------------//
void check_resolution(double lambda, Discretization const& disc)
{
    double limit = two_pi / 10;
    double lh = std::abs(lambda) * disc.grid.h;
    double lt = std::abs(lambda) * disc.time.dt;
    if (lh > limit * (1 + 1e-12) || lt > limit * (1 + 1e-12))
    {
        std::ostringstream os;
        os << "oscillation under-resolved: lambda=" << lambda
           << " needs h <= " << limit / std::abs(lambda)
           << " and dt <= " << limit / std::abs(lambda) << " (have h="
           << disc.grid.h << ", dt=" << disc.time.dt << ")";
        throw std::invalid_argument(os.str());
    }
}

//---------------------------------------------------------------------------//
namespace
{
//---------------------------------------------------------------------------//
// Collision operator on slot data
//---------------------------------------------------------------------------//
struct CollisionData
{
    // Per term: coefficient at each slot (includes the q factor if wanted)
    std::vector<std::vector<double>> coef;
    // Per term: M x M matrix acting on ordinate vectors
    std::vector<Eigen::MatrixXd> action;
    // Per term: constant table value when isotropic
    std::vector<double> iso;
    bool isotropic{false};
    std::vector<double> weights;
};

CollisionData make_collision(AngularKernel const& kernel,
                             AngularGrid const& angles,
                             SpatialGrid const& grid,
                             CoefficientField const* q, bool adjoint)
{
    CollisionData cd;
    cd.isotropic = kernel.isotropic();
    cd.weights = angles.weights;
    int M = angles.M;
    Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd const>(
        angles.weights.data(), M);
    for (auto const& t : kernel.terms())
    {
        std::vector<double> c(grid.num_slots());
        for (int s = 0; s < grid.num_slots(); ++s)
        {
            Vec2 x = grid.slot_point(s);
            c[s] = t.c(x) * (q ? (*q)(x) : 1.0);
        }
        cd.coef.push_back(std::move(c));
        cd.iso.push_back(t.table(0, 0));
        if (!cd.isotropic)
        {
            // out[m] = sum_mp A(m, mp) u[mp]
            Eigen::MatrixXd a = adjoint ? Eigen::MatrixXd(t.table
                                                          * w.asDiagonal())
                                        : Eigen::MatrixXd(t.table.transpose()
                                                          * w.asDiagonal());
            cd.action.push_back(std::move(a));
        }
    }
    return cd;
}

//! out = sum_l coef_l * (A_l u), overwriting out
void apply_collision(CollisionData const& cd, PhaseSpaceField const& u,
                     PhaseSpaceField& out)
{
    int M = u.M;
    int N = u.N;
    if (cd.coef.empty())
    {
        std::fill(out.values.begin(), out.values.end(), Complex{});
        return;
    }
    if (cd.isotropic)
    {
        std::vector<Complex> mean(N, Complex{});
        for (int m = 0; m < M; ++m)
        {
            Complex const* row = u.ordinate(m);
            double w = cd.weights[m];
            for (int s = 0; s < N; ++s)
                mean[s] += w * row[s];
        }
        std::vector<double> factor(N, 0.0);
        for (size_t l = 0; l < cd.coef.size(); ++l)
            for (int s = 0; s < N; ++s)
                factor[s] += cd.iso[l] * cd.coef[l][s];
        for (int m = 0; m < M; ++m)
        {
            Complex* row = out.ordinate(m);
            for (int s = 0; s < N; ++s)
                row[s] = factor[s] * mean[s];
        }
        return;
    }
    using RowMat
        = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMat const> uv(reinterpret_cast<double const*>(u.values.data()),
                                M, 2 * N);
    RowMat tmp(M, 2 * N);
    std::fill(out.values.begin(), out.values.end(), Complex{});
    for (size_t l = 0; l < cd.coef.size(); ++l)
    {
        tmp.noalias() = cd.action[l] * uv;
        std::vector<double> const& c = cd.coef[l];
        for (int m = 0; m < M; ++m)
        {
            Complex* row = out.ordinate(m);
            double const* tr = tmp.row(m).data();
            for (int s = 0; s < N; ++s)
                row[s] += c[s] * Complex(tr[2 * s], tr[2 * s + 1]);
        }
    }
}

//---------------------------------------------------------------------------//
// Interpolation stencils
//---------------------------------------------------------------------------//
struct Stencil1D
{
    int count{0};
    int offset[4]{};
    Complex weight[4]{};
};

/*!
 * 1D weights for the value at position d (grid units) from integer nodes.
 *
 * The phase factor exp(i k (o - d)) demodulates a carrier with wavenumber k
 * (per grid unit) along the axis.
 */
Stencil1D make_stencil(double d, Interpolation interp, double k)
{
    Stencil1D st;
    double a = std::floor(d);
    double f = d - a;
    if (f < 1e-13)
    {
        f = 0;
    }
    else if (f > 1 - 1e-13)
    {
        a += 1;
        f = 0;
    }
    int ia = static_cast<int>(a);
    double w[4];
    int o0;
    if (interp == Interpolation::bilinear)
    {
        st.count = 2;
        o0 = ia;
        w[0] = 1 - f;
        w[1] = f;
    }
    else
    {
        st.count = 4;
        o0 = ia - 1;
        w[0] = -f * (f - 1) * (f - 2) / 6;
        w[1] = (f + 1) * (f - 1) * (f - 2) / 2;
        w[2] = -(f + 1) * f * (f - 2) / 2;
        w[3] = (f + 1) * f * (f - 1) / 6;
    }
    for (int i = 0; i < st.count; ++i)
    {
        st.offset[i] = o0 + i;
        st.weight[i] = w[i];
        if (k != 0)
            st.weight[i] *= std::polar(1.0, k * (st.offset[i] - d));
    }
    return st;
}

constexpr int margin = 5;

//---------------------------------------------------------------------------//
/*!
 * Time-marching state for one forward solve.
 */
class Solver
{
  public:
    Solver(Discretization const& disc, CoefficientField const& q,
           AngularKernel const& kernel, Inflow const& inflow,
           SolveOptions const& options, VolumeSource const* source);

    //! Runs the solve; observer sees slices in marching order
    BoundaryFlux run(std::vector<int> const& record,
                     StepObserver const& observer);

  private:
    Discretization const& disc_;
    CoefficientField const& q_;
    Inflow const& inflow_;
    SampledInflow const* sampled_;
    SolveOptions const& options_;
    VolumeSource const* source_;

    int M_;
    int NS_;
    int n_;
    int np_;
    double inflow_carrier_;
    double sl_carrier_;
    CollisionData collision_;

    // Collided update
    std::vector<Stencil1D> sx_;
    std::vector<Stencil1D> sy_;
    std::vector<double> absorb_;  // [m * n^2 + node]
    bool absorbing_{false};
    std::vector<int> slot_padded_;

    // Uncollided characteristics from each slot
    std::vector<double> tau_;
    std::vector<EntryPoint> entry_;
    std::vector<double> atten_;
    std::vector<Complex> phase_;  // exp(-i c omega.x)
    // Sampled inflow: level shift, arc nodes and combined weights per slot
    struct UncTap
    {
        int shift;
        int b0;
        int b1;
        double w0;
        double c0;
        double c1;
    };
    std::vector<UncTap> taps_;

    // Outgoing trace
    struct TraceNode
    {
        int b;
        double tau;
        EntryPoint entry;
        double atten;
        Complex phase;
        SampledInflow::Tap tap;
        int count;
        int index[16];
        Complex weight[16];
    };
    std::vector<std::vector<TraceNode>> trace_;

    int padded(int node) const
    {
        int i = node % n_;
        int j = node / n_;
        return (i + margin) + np_ * (j + margin);
    }
    double attenuation(Vec2 x, Vec2 omega, double tau) const;
    template<int K>
    void advect(Stencil1D const& sx, Stencil1D const& sy, double* re,
                double* im, double* tre, double* tim,
                double const* absorb) const;
    void uncollided(int m, int n, Complex* out,
                    std::vector<double>& times) const;
};

double Solver::attenuation(Vec2 x, Vec2 omega, double tau) const
{
    if (q_.is_zero() || tau <= 0)
        return 1;
    // Chords stay inside the closed disk, where a constant field is exact
    if (auto c = q_.constant_value())
        return std::exp(-*c * tau);
    double h = disc_.grid.h;
    double integral = simpson(
        [&](double s) { return q_(x - s * omega); }, 0.0, tau, 0.5 * h);
    return std::exp(-integral);
}

Solver::Solver(Discretization const& disc, CoefficientField const& q,
               AngularKernel const& kernel, Inflow const& inflow,
               SolveOptions const& options, VolumeSource const* source)
    : disc_(disc)
    , q_(q)
    , inflow_(inflow)
    , sampled_(dynamic_cast<SampledInflow const*>(&inflow))
    , options_(options)
    , source_(source)
{
    SpatialGrid const& g = disc.grid;
    AngularGrid const& ang = disc.angles;
    M_ = ang.M;
    NS_ = g.num_slots();
    n_ = g.n;
    np_ = n_ + 2 * margin;
    double h = g.h;
    double dt = disc.time.dt;
    if (dt > 2 * h * (1 + 1e-12))
    {
        std::ostringstream os;
        os << "time step " << dt << " exceeds the stability rule dt <= 2h = "
           << 2 * h;
        throw std::invalid_argument(os.str());
    }
    if (!kernel.empty() && kernel.M() != M_)
    {
        throw std::invalid_argument("kernel table size does not match grid");
    }
    inflow_carrier_ = inflow.carrier();
    sl_carrier_ = options.carrier.value_or(inflow_carrier_);
    collision_ = make_collision(kernel, ang, g, &q, false);

    // Collided stencils: the foot of node x is x - dt*omega
    sx_.resize(M_);
    sy_.resize(M_);
    for (int m = 0; m < M_; ++m)
    {
        Vec2 om = ang.directions[m];
        sx_[m] = make_stencil(-dt * om.x / h, options.interpolation,
                              sl_carrier_ * om.x * h);
        sy_[m] = make_stencil(-dt * om.y / h, options.interpolation,
                              sl_carrier_ * om.y * h);
    }

    absorbing_ = !q.is_zero();
    if (absorbing_)
    {
        int nn = g.num_nodes();
        absorb_.resize(size_t(M_) * nn);
        std::vector<double> qx(nn);
        for (int k = 0; k < nn; ++k)
            qx[k] = q(g.node(k));
        parallel_for(M_, [&](int m) {
            Vec2 om = ang.directions[m];
            for (int k = 0; k < nn; ++k)
            {
                double qf = q(g.node(k) - dt * om);
                absorb_[size_t(m) * nn + k] = std::exp(-0.5 * dt * (qx[k] + qf));
            }
        });
    }
    slot_padded_.resize(NS_);
    for (int s = 0; s < NS_; ++s)
        slot_padded_[s] = padded(g.inside[s]);

    // Characteristics back to the inflow boundary
    tau_.resize(size_t(M_) * NS_);
    entry_.resize(size_t(M_) * NS_);
    atten_.resize(size_t(M_) * NS_);
    if (inflow_carrier_ != 0)
        phase_.resize(size_t(M_) * NS_);
    if (sampled_)
        taps_.resize(size_t(M_) * NS_);
    Domain const& dom = disc.domain;
    parallel_for(M_, [&](int m) {
        Vec2 om = ang.directions[m];
        for (int s = 0; s < NS_; ++s)
        {
            size_t i = size_t(m) * NS_ + s;
            Vec2 x = g.slot_point(s);
            double tau = exit_time(dom, x, -om);
            Vec2 sig = x - tau * om;
            tau_[i] = tau;
            entry_[i] = {sig, dom.boundary_angle(sig)};
            atten_[i] = attenuation(x, om, tau);
            if (inflow_carrier_ != 0)
                phase_[i] = std::polar(1.0, -inflow_carrier_ * dot(om, x));
            if (sampled_)
            {
                auto tp = sampled_->tap(m, entry_[i].angle);
                double r = tau / dt;
                int k = static_cast<int>(std::ceil(r - 1e-12));
                double ft = std::max(k - r, 0.0);
                double scale = tp.w0 + tp.w1 > 0 ? atten_[i] : 0.0;
                taps_[i] = {k, tp.b0, tp.b1, tp.w0, (1 - ft) * scale,
                            ft * scale};
            }
        }
    });

    trace_.resize(M_);
}

void Solver::uncollided(int m, int n, Complex* out,
                        std::vector<double>& times) const
{
    size_t base = size_t(m) * NS_;
    double t = disc_.time.t(n);
    if (sampled_)
    {
        BoundaryFlux const& flux = sampled_->flux();
        if (!flux.records(m))
        {
            std::fill(out, out + NS_, Complex{});
            return;
        }
        int steps = disc_.time.steps;
        Complex const* data = sampled_->demodulated().data();
        size_t stride = flux.index(1, m, 0) - flux.index(0, m, 0);
        Complex const* row0 = data + flux.index(0, m, 0);
        for (int s = 0; s < NS_; ++s)
        {
            UncTap const& tp = taps_[base + s];
            int n0 = n - tp.shift;
            if (n0 < 0)
            {
                out[s] = 0;
                continue;
            }
            Complex const* lo = row0 + n0 * stride;
            Complex a = tp.w0 * lo[tp.b0] + (1 - tp.w0) * lo[tp.b1];
            if (n0 == steps)
            {
                out[s] = (tp.c0 + tp.c1) * a;
                continue;
            }
            Complex const* hi = lo + stride;
            Complex b = tp.w0 * hi[tp.b0] + (1 - tp.w0) * hi[tp.b1];
            out[s] = tp.c0 * a + tp.c1 * b;
        }
        if (inflow_carrier_ != 0)
        {
            Complex ct = std::polar(1.0, inflow_carrier_ * t);
            for (int s = 0; s < NS_; ++s)
                out[s] *= ct * phase_[base + s];
        }
        return;
    }
    times.resize(NS_);
    for (int s = 0; s < NS_; ++s)
        times[s] = t - tau_[base + s];
    inflow_.envelope(m, times,
                     std::span<EntryPoint const>(entry_.data() + base, NS_),
                     std::span<Complex>(out, NS_));
    if (inflow_carrier_ != 0)
    {
        Complex ct = std::polar(1.0, inflow_carrier_ * t);
        for (int s = 0; s < NS_; ++s)
            out[s] *= atten_[base + s] * ct * phase_[base + s];
    }
    else
    {
        for (int s = 0; s < NS_; ++s)
            out[s] *= atten_[base + s];
    }
}

/*!
 * Separable interpolation of one ordinate plane at the characteristic feet.
 *
 * Planes are stored as separate real and imaginary arrays so the stencil
 * loops vectorize.
 */
template<int K>
void Solver::advect(Stencil1D const& sx, Stencil1D const& sy,
                    double* __restrict re, double* __restrict im,
                    double* __restrict tre, double* __restrict tim,
                    double const* absorb) const
{
    double xr[K], xi[K], yr[K], yi[K];
    ptrdiff_t ox[K];
    ptrdiff_t oy[K];
    for (int a = 0; a < K; ++a)
    {
        xr[a] = sx.weight[a].real();
        xi[a] = sx.weight[a].imag();
        yr[a] = sy.weight[a].real();
        yi[a] = sy.weight[a].imag();
        ox[a] = sx.offset[a];
        oy[a] = ptrdiff_t(sy.offset[a]) * np_;
    }
    // Rows reachable from the y stencil
    int jlo = std::max(-margin, sy.offset[0]);
    int jhi = std::min(n_ + margin, n_ + sy.offset[K - 1]);
    for (int j = jlo; j < jhi; ++j)
    {
        size_t rb = size_t(j + margin) * np_ + margin;
        double const* sr = re + rb;
        double const* si = im + rb;
        double* dr = tre + rb;
        double* di = tim + rb;
        for (int i = 0; i < n_; ++i)
        {
            double ar = 0;
            double ai = 0;
            for (int a = 0; a < K; ++a)
            {
                double ur = sr[i + ox[a]];
                double ui = si[i + ox[a]];
                ar += xr[a] * ur - xi[a] * ui;
                ai += xr[a] * ui + xi[a] * ur;
            }
            dr[i] = ar;
            di[i] = ai;
        }
    }
    for (int j = 0; j < n_; ++j)
    {
        size_t rb = size_t(j + margin) * np_ + margin;
        double const* sr = tre + rb;
        double const* si = tim + rb;
        double* dr = re + rb;
        double* di = im + rb;
        double const* ab = absorb ? absorb + size_t(j) * n_ : nullptr;
        for (int i = 0; i < n_; ++i)
        {
            double ar = 0;
            double ai = 0;
            for (int b = 0; b < K; ++b)
            {
                double ur = sr[i + oy[b]];
                double ui = si[i + oy[b]];
                ar += yr[b] * ur - yi[b] * ui;
                ai += yr[b] * ui + yi[b] * ur;
            }
            double f = ab ? ab[i] : 1.0;
            dr[i] = f * ar;
            di[i] = f * ai;
        }
    }
}

BoundaryFlux Solver::run(std::vector<int> const& record,
                         StepObserver const& observer)
{
    SpatialGrid const& g = disc_.grid;
    AngularGrid const& ang = disc_.angles;
    TimeGrid const& tg = disc_.time;
    Domain const& dom = disc_.domain;
    double h = g.h;
    double dt = tg.dt;
    int Nb = g.num_boundary();

    BoundaryFlux trace(Side::outgoing, tg, M_, Nb, record);
    trace.carrier = inflow_carrier_;

    // Outgoing trace geometry for recorded ordinates
    for (int m : trace.ordinates())
    {
        Vec2 om = ang.directions[m];
        for (int b : disc_.split.outgoing[m])
        {
            TraceNode tn{};
            tn.b = b;
            Vec2 sig = g.boundary[b].sigma;
            double tau = exit_time(dom, sig, -om);
            Vec2 ent = sig - tau * om;
            tn.tau = tau;
            tn.entry = {ent, dom.boundary_angle(ent)};
            if (sampled_)
                tn.tap = sampled_->tap(m, tn.entry.angle);
            tn.atten = attenuation(sig, om, tau);
            tn.phase = inflow_carrier_ != 0
                           ? std::polar(1.0, -inflow_carrier_ * dot(om, sig))
                           : Complex{1};
            double px = (sig.x - g.origin.x) / h;
            double py = (sig.y - g.origin.y) / h;
            Stencil1D ax = make_stencil(px, options_.interpolation,
                                        sl_carrier_ * om.x * h);
            Stencil1D ay = make_stencil(py, options_.interpolation,
                                        sl_carrier_ * om.y * h);
            tn.count = 0;
            for (int jy = 0; jy < ay.count; ++jy)
            {
                for (int ix = 0; ix < ax.count; ++ix)
                {
                    int i = ax.offset[ix];
                    int j = ay.offset[jy];
                    if (i < -margin || j < -margin || i >= n_ + margin
                        || j >= n_ + margin)
                        continue;
                    tn.index[tn.count] = (i + margin) + np_ * (j + margin);
                    tn.weight[tn.count] = ax.weight[ix] * ay.weight[jy];
                    ++tn.count;
                }
            }
            trace_[m].push_back(tn);
        }
    }

    size_t plane = size_t(np_) * np_;
    // Collided part: real plane then imaginary plane per ordinate
    std::vector<double> col(2 * size_t(M_) * plane, 0.0);
    auto col_re = [&](int m) { return col.data() + 2 * size_t(m) * plane; };
    auto col_im = [&](int m) { return col_re(m) + plane; };
    PhaseSpaceField u(M_, NS_);
    PhaseSpaceField src(M_, NS_);

    auto compute_uncollided = [&](int n) {
        parallel_for(M_, [&](int m) {
            thread_local std::vector<double> times;
            uncollided(m, n, u.ordinate(m), times);
        });
    };
    auto record_trace = [&](int n) {
        double t = tg.t(n);
        Complex ct = inflow_carrier_ != 0 ? std::polar(1.0, inflow_carrier_ * t)
                                          : Complex{1};
        parallel_for(static_cast<int>(trace.ordinates().size()), [&](int i) {
            int m = trace.ordinates()[i];
            double const* cr = col_re(m);
            double const* ci = col_im(m);
            std::vector<TraceNode> const& nodes = trace_[m];
            std::vector<double> times(nodes.size());
            std::vector<EntryPoint> pts(nodes.size());
            std::vector<Complex> env(nodes.size());
            for (size_t k = 0; k < nodes.size(); ++k)
            {
                times[k] = t - nodes[k].tau;
                pts[k] = nodes[k].entry;
            }
            if (sampled_)
            {
                for (size_t k = 0; k < nodes.size(); ++k)
                    env[k] = sampled_->evaluate(m, nodes[k].tap, times[k]);
            }
            else
            {
                inflow_.envelope(m, times, pts, env);
            }
            for (size_t k = 0; k < nodes.size(); ++k)
            {
                TraceNode const& tn = nodes[k];
                Complex v = env[k] * tn.atten * ct * tn.phase;
                for (int c = 0; c < tn.count; ++c)
                    v += tn.weight[c]
                         * Complex(cr[tn.index[c]], ci[tn.index[c]]);
                trace.at(n, m, tn.b) = v;
            }
        });
    };

    // Slot values are only read by scattering and the observer
    bool need_slots = !collision_.coef.empty() || bool(observer);
    // Without sources the collided part stays identically zero
    bool collided_active = false;
    if (need_slots)
        compute_uncollided(0);
    for (int n = 0;; ++n)
    {
        double t = tg.t(n);
        double check = 0;
        for (int m = 0; need_slots && m < M_; ++m)
        {
            double const* cr = col_re(m);
            double const* ci = col_im(m);
            Complex* out = u.ordinate(m);
            for (int s = 0; s < NS_; ++s)
            {
                int k = slot_padded_[s];
                out[s] += Complex(cr[k], ci[k]);
                check += std::abs(out[s].real()) + std::abs(out[s].imag());
            }
        }
        if (!need_slots)
        {
            for (int s = 0; s < NS_; s += 7)
                check += std::abs(col[slot_padded_[s]]);
            for (int b = 0; b < trace.Nb(); ++b)
                check += std::abs(trace.values()[b]);
        }
        if (!std::isfinite(check))
        {
            throw std::runtime_error("non-finite solution at step "
                                     + std::to_string(n));
        }
        u.t = t;
        record_trace(n);
        if (observer)
            observer(n, u);
        if (n == tg.steps)
            break;

        // Scattering and volume sources at level n
        if (need_slots)
            apply_collision(collision_, u, src);
        else
            std::fill(src.values.begin(), src.values.end(), Complex{});
        if (source_)
        {
            parallel_for(M_, [&](int m) {
                thread_local std::vector<Complex> extra;
                extra.assign(NS_, Complex{});
                source_->evaluate(n, t, m, extra);
                Complex* row = src.ordinate(m);
                for (int s = 0; s < NS_; ++s)
                    row[s] += extra[s];
            });
        }

        // Collided update: w = u_c + dt*S, then u_c(x) = a(x) w(x - dt*omega)
        collided_active = collided_active || need_slots || source_;
        parallel_for(M_, [&](int m) {
            if (!collided_active)
                return;
            double* cr = col_re(m);
            double* ci = col_im(m);
            Complex const* sm = src.ordinate(m);
            for (int s = 0; s < NS_; ++s)
            {
                int k = slot_padded_[s];
                cr[k] += dt * sm[s].real();
                ci[k] += dt * sm[s].imag();
            }
            thread_local std::vector<double> tmp;
            tmp.resize(2 * plane);
            double const* ab = absorbing_
                                   ? absorb_.data() + size_t(m) * n_ * n_
                                   : nullptr;
            if (sx_[m].count == 2)
                advect<2>(sx_[m], sy_[m], cr, ci, tmp.data(),
                          tmp.data() + plane, ab);
            else
                advect<4>(sx_[m], sy_[m], cr, ci, tmp.data(),
                          tmp.data() + plane, ab);
        });

        if (need_slots)
            compute_uncollided(n + 1);
    }
    return trace;
}

//---------------------------------------------------------------------------//
// Adjoint adapters
//---------------------------------------------------------------------------//
/*!
 * Inflow of the reversed problem: gt(s, m, sigma) = g(T - s, -m, sigma).
 */
class ReversedInflow final : public Inflow
{
  public:
    ReversedInflow(Inflow const& g, double T, AngularGrid const& angles)
        : g_(g), T_(T), angles_(angles)
    {
    }

    double carrier() const final { return -g_.carrier(); }

    void envelope(int m, std::span<double const> times,
                  std::span<EntryPoint const> points,
                  std::span<Complex> out) const final
    {
        thread_local std::vector<double> rt;
        rt.resize(times.size());
        for (size_t i = 0; i < times.size(); ++i)
        {
            // Times before zero in reversed time lie after T: no data
            rt[i] = times[i] < 0 ? -1.0 : T_ - times[i];
        }
        g_.envelope(angles_.opposite(m), rt, points, out);
        double c = g_.carrier();
        if (c != 0)
        {
            Complex f = std::polar(1.0, c * T_);
            for (auto& v : out)
                v *= f;
        }
    }

  private:
    Inflow const& g_;
    double T_;
    AngularGrid const& angles_;
};

class ReversedSource final : public VolumeSource
{
  public:
    ReversedSource(VolumeSource const& s, TimeGrid const& tg,
                   AngularGrid const& angles)
        : s_(s), tg_(tg), angles_(angles)
    {
    }

    void evaluate(int n, double, int m, std::span<Complex> out) const final
    {
        int orig = tg_.steps - n;
        s_.evaluate(orig, tg_.t(orig), angles_.opposite(m), out);
        for (auto& v : out)
            v = -v;
    }

  private:
    VolumeSource const& s_;
    TimeGrid const& tg_;
    AngularGrid const& angles_;
};

PhaseSpaceField reorder(PhaseSpaceField const& ut, AngularGrid const& angles,
                        double t)
{
    PhaseSpaceField v(ut.M, ut.N, t);
    for (int m = 0; m < ut.M; ++m)
    {
        Complex const* src = ut.ordinate(angles.opposite(m));
        std::copy(src, src + ut.N, v.ordinate(m));
    }
    return v;
}

//---------------------------------------------------------------------------//
}  // namespace

//---------------------------------------------------------------------------//
SolveResult forward_solve(Discretization const& disc,
                          CoefficientField const& q,
                          AngularKernel const& kernel, Inflow const& inflow,
                          SolveOptions const& options)
{
    Solver solver(disc, q, kernel, inflow, options, options.source);
    SolveResult result;
    int stride = options.trajectory_stride;
    StepObserver obs;
    if (stride > 0 || options.observer)
    {
        obs = [&](int n, PhaseSpaceField const& u) {
            if (stride > 0 && n % stride == 0)
                result.trajectory.push_back(u);
            if (options.observer)
                options.observer(n, u);
        };
    }
    result.trace = solver.run(options.record_ordinates, obs);
    return result;
}

SolveResult forward_solve(Discretization const& disc,
                          CoefficientField const& q,
                          AngularKernel const& kernel,
                          BoundaryFlux const& inflow,
                          SolveOptions const& options)
{
    if (inflow.side() != Side::incoming)
    {
        throw std::invalid_argument("forward inflow must be incoming data");
    }
    SampledInflow sampled(inflow, disc);
    return forward_solve(disc, q, kernel, sampled, options);
}

namespace
{
//! Adjoint solve given the inflow of the reversed problem
SolveResult adjoint_reversed(Discretization const& disc,
                             CoefficientField const& q,
                             AngularKernel const& kernel, Inflow const& rin,
                             double data_carrier, SolveOptions const& options)
{
    AngularGrid const& ang = disc.angles;
    TimeGrid const& tg = disc.time;
    AngularKernel reversed = kernel.reversed_adjoint(ang);
    std::optional<ReversedSource> rsrc;
    if (options.source)
        rsrc.emplace(*options.source, tg, ang);

    SolveOptions inner = options;
    inner.observer = nullptr;
    inner.trajectory_stride = 0;
    inner.source = rsrc ? &*rsrc : nullptr;
    if (options.carrier)
        inner.carrier = -*options.carrier;
    std::vector<int> record;
    if (options.record_ordinates.empty())
    {
        record.resize(ang.M);
        std::iota(record.begin(), record.end(), 0);
    }
    else
    {
        record = options.record_ordinates;
    }
    for (int& m : record)
        m = ang.opposite(m);

    Solver solver(disc, q, reversed, rin, inner, inner.source);
    SolveResult result;
    int stride = options.trajectory_stride;
    StepObserver obs;
    if (options.observer || stride > 0)
    {
        obs = [&](int nr, PhaseSpaceField const& ut) {
            int n = tg.steps - nr;
            bool keep = stride > 0 && n % stride == 0;
            if (!keep && !options.observer)
                return;
            PhaseSpaceField v = reorder(ut, ang, tg.t(n));
            if (options.observer)
                options.observer(n, v);
            if (keep)
                result.trajectory.push_back(std::move(v));
        };
    }
    BoundaryFlux rt = solver.run(record, obs);
    std::reverse(result.trajectory.begin(), result.trajectory.end());

    std::vector<int> orig(record.size());
    for (size_t i = 0; i < record.size(); ++i)
        orig[i] = ang.opposite(record[i]);
    BoundaryFlux trace(Side::incoming, tg, ang.M, rt.Nb(), orig);
    trace.carrier = data_carrier;
    for (int nr = 0; nr < tg.levels(); ++nr)
    {
        int n = tg.steps - nr;
        for (int mr : rt.ordinates())
        {
            int m = ang.opposite(mr);
            for (int b = 0; b < rt.Nb(); ++b)
                trace.at(n, m, b) = rt.at(nr, mr, b);
        }
    }
    result.trace = std::move(trace);
    return result;
}

}  // namespace

SolveResult adjoint_solve(Discretization const& disc,
                          CoefficientField const& q,
                          AngularKernel const& kernel, Inflow const& data,
                          SolveOptions const& options)
{
    ReversedInflow rin(data, disc.time.T, disc.angles);
    return adjoint_reversed(disc, q, kernel, rin, data.carrier(), options);
}

SolveResult adjoint_solve(Discretization const& disc,
                          CoefficientField const& q,
                          AngularKernel const& kernel,
                          BoundaryFlux const& data, SolveOptions const& options)
{
    if (data.side() != Side::outgoing)
    {
        throw std::invalid_argument("adjoint data must be outgoing data");
    }
    // Reversed data: g(T - s, -omega) carried by -c; the envelope absorbs
    // the constant phase exp(i c T)
    AngularGrid const& ang = disc.angles;
    TimeGrid const& tg = disc.time;
    std::vector<int> ords;
    for (int m : data.ordinates())
        ords.push_back(ang.opposite(m));
    BoundaryFlux rev(Side::incoming, tg, data.M(), data.Nb(), ords);
    rev.carrier = -data.carrier;
    for (int n = 0; n < tg.levels(); ++n)
        for (int m : data.ordinates())
            for (int b = 0; b < data.Nb(); ++b)
                rev.at(tg.steps - n, ang.opposite(m), b) = data.at(n, m, b);
    SampledInflow sampled(rev, disc);
    return adjoint_reversed(disc, q, kernel, sampled, data.carrier, options);
}

//---------------------------------------------------------------------------//
PhaseSpaceField scatter_apply(AngularKernel const& kernel,
                              AngularGrid const& angles,
                              SpatialGrid const& grid,
                              PhaseSpaceField const& u, bool adjoint)
{
    if (u.M != angles.M || u.N != grid.num_slots())
    {
        throw std::invalid_argument("scatter_apply: field size mismatch");
    }
    if (!kernel.empty() && kernel.M() != angles.M)
    {
        throw std::invalid_argument("scatter_apply: kernel size mismatch");
    }
    CollisionData cd = make_collision(kernel, angles, grid, nullptr, adjoint);
    PhaseSpaceField out(u.M, u.N, u.t);
    apply_collision(cd, u, out);
    return out;
}

//---------------------------------------------------------------------------//
}  // namespace ltid
