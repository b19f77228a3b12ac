//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file tools/ltid.cc
//! Command-line driver for design, simulation, identification and checks.
//---------------------------------------------------------------------------//
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <CLI11.hpp>

#include "ltid/Albedo.hh"
#include "ltid/Design.hh"
#include "ltid/Identify.hh"
#include "ltid/Probes.hh"

#include "Artifacts.hh"
#include "Config.hh"

using nlohmann::json;
using namespace ltid;
using namespace ltid::app;

namespace
{
//---------------------------------------------------------------------------//
struct Context
{
    ExperimentConfig cfg;
    json resolved;
    std::string dir;

    std::string path(std::string const& name) const
    {
        return (std::filesystem::path(dir) / name).string();
    }
    std::string design_path() const
    {
        return cfg.design_path.empty() ? path("design.json") : cfg.design_path;
    }
    std::string measurement_path() const
    {
        return cfg.measurement_path.empty() ? path("measurements.csv")
                                            : cfg.measurement_path;
    }
};

std::string read_file(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

AngularKernel true_kernel(Context const& ctx, Basis const& basis,
                          AngularGrid const& angles)
{
    return AngularKernel::separable(make_field(ctx.cfg.c, basis),
                                    make_phase(ctx.cfg), angles);
}

//---------------------------------------------------------------------------//
int run_design(Context const& ctx)
{
    auto const& cfg = ctx.cfg;
    Basis basis = default_basis(make_domain(cfg));
    auto disc = make_disc(cfg);
    DesignOptions opts;
    opts.kind = cfg.kind;
    opts.pool_directions = cfg.pool_directions;
    opts.pool_centers = cfg.pool_centers;
    opts.cond_threshold = cfg.cond_threshold;
    opts.seed = cfg.seed;
    CaseBData caseb{make_field(cfg.q, basis),
                    true_kernel(ctx, basis, disc.angles)};
    DesignResult d = select_design(basis, disc.angles, opts,
                                   cfg.kind == ProbeCase::b ? &caseb
                                                            : nullptr);
    certify_norm_equivalence(d, basis);
    write_artifact(ctx.design_path(), design_json(d, disc.angles),
                   ctx.resolved);
    std::printf("design: %d probes, cond %.4g -> %s\n", d.k(), d.cond,
                ctx.design_path().c_str());
    return 0;
}

//---------------------------------------------------------------------------//
int run_simulate(Context const& ctx)
{
    auto const& cfg = ctx.cfg;
    Basis basis = default_basis(make_domain(cfg));
    auto disc = make_disc(cfg);
    json dj = read_json(ctx.design_path());
    DesignResult design = design_from_json(dj);
    auto probes = design_probes(design, cfg.lambda, cfg.r);

    auto t0 = std::chrono::steady_clock::now();
    Discretization sim = cfg.refine_measurements
                             ? make_discretization(disc.domain, refine(disc))
                             : disc;
    auto q = make_field(cfg.q, basis);
    auto set = simulate_measurements(sim, q, true_kernel(ctx, basis, sim.angles),
                                     probes, make_solve_options(cfg));
    if (cfg.refine_measurements)
        set = subsample(set, disc);
    if (cfg.noise > 0)
        add_noise(set, cfg.noise, cfg.noise_seed);
    double seconds
        = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();

    std::string csv = measurements_csv(set, disc);
    atomic_write(ctx.measurement_path(), csv);
    json meta = {{"measurements", ctx.measurement_path()},
                 {"csv_hash", {{"algorithm", "fnv1a-64"},
                               {"value", hex(fnv1a(csv))}}},
                 {"design_hash", dj.value("hash", json{})},
                 {"provenance", set.provenance},
                 {"noise", set.noise},
                 {"probes", json::array()}};
    for (auto const& p : probes)
    {
        meta["probes"].push_back({{"case", p.kind == ProbeCase::b ? "b" : "a"},
                                  {"m_tilde", p.m_tilde},
                                  {"lambda", p.lambda},
                                  {"r", p.r},
                                  {"squared", p.squared}});
    }
    write_artifact(ctx.measurement_path() + ".json", meta, ctx.resolved);
    std::printf("simulate: %zu probes in %.1f s -> %s\n", probes.size(),
                seconds, ctx.measurement_path().c_str());
    return 0;
}

//---------------------------------------------------------------------------//
int run_identify(Context const& ctx, ProbeCase kind)
{
    auto const& cfg = ctx.cfg;
    Basis basis = default_basis(make_domain(cfg));
    auto disc = make_disc(cfg);
    json dj = read_json(ctx.design_path());
    DesignResult design = design_from_json(dj);
    if (design.kind != kind)
    {
        std::fprintf(stderr, "error: design is for case %s\n",
                     design.kind == ProbeCase::b ? "b" : "a");
        return 1;
    }
    auto probes = design_probes(design, cfg.lambda, cfg.r);
    auto set = parse_measurements_csv(read_file(ctx.measurement_path()),
                                      probes, disc);

    IdentifyOptions opts;
    opts.mode = cfg.mode;
    opts.max_iter = cfg.max_iter;
    opts.tol = cfg.tol;
    opts.cond_threshold = cfg.cond_threshold;
    opts.solve = make_solve_options(cfg);
    auto kernel = true_kernel(ctx, basis, disc.angles);
    ReconstructionResult r;
    if (kind == ProbeCase::a)
    {
        r = reconstruct_q(set, design, basis, kernel, disc, opts);
    }
    else
    {
        // Only the angular table of the kernel is used
        if (kernel.empty())
            kernel = AngularKernel::separable(CoefficientField::constant(1),
                                              make_phase(cfg), disc.angles);
        r = reconstruct_c(set, design, basis, make_field(cfg.q, basis),
                          kernel, disc, opts);
    }

    json body = result_json(r);
    body["design_ref"] = {{"path", ctx.design_path()},
                          {"hash", dj.value("hash", json{})}};
    body["measurement_ref"]
        = {{"path", ctx.measurement_path()},
           {"hash", hex(fnv1a(read_file(ctx.measurement_path())))}};
    char const* stem = kind == ProbeCase::a ? "identify_q" : "identify_c";
    write_artifact(ctx.path(std::string(stem) + ".json"), body, ctx.resolved);

    Series res{"residual", {}, r.residuals};
    for (size_t i = 0; i < r.residuals.size(); ++i)
        res.x.push_back(static_cast<double>(i));
    Series upd{"update", {}, r.updates};
    for (size_t i = 0; i < r.updates.size(); ++i)
        upd.x.push_back(static_cast<double>(i));
    atomic_write(ctx.path(std::string(stem) + ".svg"),
                 svg_plot("Convergence", "iteration", "log10 norm",
                          {res, upd}, true));

    std::printf("%s: beta", stem);
    for (int i = 0; i < r.beta.size(); ++i)
        std::printf(" %.6g", r.beta(i));
    std::printf(", %d iterations, %.1f s\n", r.iterations, r.wall_seconds);
    return r.status == ReconstructionStatus::converged ? 0 : 3;
}

//---------------------------------------------------------------------------//
BoundaryFlux smooth_data(Discretization const& disc, Side side)
{
    BoundaryFlux f(side, disc.time, disc.angles.M, disc.grid.num_boundary());
    double T = disc.time.T;
    for (int n = 0; n < disc.time.levels(); ++n)
    {
        double t = disc.time.t(n);
        double env = t > 0 && t < T ? std::pow(std::sin(pi * t / T), 4) : 0;
        for (int m = 0; m < disc.angles.M; ++m)
        {
            for (int b = 0; b < disc.grid.num_boundary(); ++b)
            {
                double a = disc.grid.boundary[b].angle;
                double mod = side == Side::incoming ? 1 + 0.5 * std::cos(a)
                                                    : 1 + 0.5 * std::sin(2 * a);
                f.at(n, m, b) = Complex(env * mod, 0.25 * env * std::cos(m));
            }
        }
    }
    f.restrict_to_side(disc.split);
    return f;
}

double order(std::vector<double> const& v, size_t i)
{
    return std::log2(v[i - 1] / v[i]);
}

int run_verify(Context const& ctx)
{
    auto const& cfg = ctx.cfg;
    Domain domain = make_domain(cfg);
    Basis basis = default_basis(domain);
    auto q = make_field(cfg.q, basis);
    auto c = make_field(cfg.c, basis);
    json report = json::object();
    if (c.is_zero())
    {
        // The suites exercise the collided solver
        c = CoefficientField::constant(0.2).interior(domain);
        report["scattering_fallback"] = 0.2;
    }
    bool all_pass = true;
    std::vector<double> hs = cfg.verify_h;
    std::vector<double> log_h;
    for (double h : hs)
        log_h.push_back(-std::log2(h));
    auto grid_at = [&](double h) {
        return make_discretization(domain,
                                   GridSpec{h, 0, cfg.verify_M, 0});
    };

    // Positivity
    {
        auto disc = grid_at(hs.front());
        SolveOptions opts;
        opts.interpolation = Interpolation::bilinear;
        double lowest = 0;
        opts.observer = [&](int, PhaseSpaceField const& u) {
            for (auto v : u.values)
                lowest = std::min(lowest, v.real());
        };
        auto f = smooth_data(disc, Side::incoming);
        for (auto& v : f.values())
            v = v.real();
        forward_solve(disc, q,
                      AngularKernel::separable(c, make_phase(cfg),
                                               disc.angles),
                      f, opts);
        bool pass = lowest >= -1e-12;
        all_pass = all_pass && pass;
        report["positivity"] = {{"h", hs.front()},
                                {"minimum", lowest},
                                {"pass", pass}};
    }

    // Duality and Gauss gaps over the grid ladder
    {
        std::vector<double> dual;
        std::vector<double> gauss;
        for (double h : hs)
        {
            auto disc = grid_at(h);
            auto k = AngularKernel::separable(c, make_phase(cfg), disc.angles);
            auto f = smooth_data(disc, Side::incoming);
            auto g = smooth_data(disc, Side::outgoing);
            SolveOptions opts = make_solve_options(cfg);
            Complex ref = flux_pairing(albedo(disc, q, k, f, opts), g, disc);
            dual.push_back(std::abs(duality_gap(disc, q, k, f, g, opts))
                           / std::abs(ref));
            auto u = [&disc](int m, Vec2 x) {
                Vec2 om = disc.angles.directions[m];
                return std::polar(1 + 0.3 * x.x, 2 * x.y + om.x);
            };
            auto v = [](int, Vec2 x) {
                return Complex(std::cos(x.x + x.y), 0.5 * x.x * x.y);
            };
            gauss.push_back(gauss_gap(disc, u, v).gap);
        }
        bool pass = true;
        for (size_t i = 1; i < dual.size(); ++i)
            pass = pass && dual[i] < dual[i - 1];
        all_pass = all_pass && pass;
        report["duality_gap"] = {{"h", hs}, {"relative_gap", dual},
                                 {"pass", pass}};
        report["gauss_gap"] = {{"h", hs}, {"gap", gauss}};
        std::vector<double> orders;
        for (size_t i = 1; i < dual.size(); ++i)
            orders.push_back(order(dual, i));
        report["duality_gap"]["orders"] = orders;
        atomic_write(ctx.path("verify_gaps.svg"),
                     svg_plot("Identity gaps", "log2(1/h)", "log10 gap",
                              {{"duality", log_h, dual},
                               {"gauss", log_h, gauss}},
                              true));
    }

    // Remainder ladder and weak-time decay on the experiment grid
    {
        auto disc = make_disc(cfg);
        std::vector<double> lambdas;
        std::vector<double> skipped;
        for (double l : cfg.verify_lambdas)
        {
            try
            {
                check_resolution(l, disc);
                lambdas.push_back(l);
            }
            catch (std::invalid_argument const&)
            {
                skipped.push_back(l);
            }
        }
        SolveOptions opts = make_solve_options(cfg);
        auto k = AngularKernel::separable(c, make_phase(cfg), disc.angles);
        ProbeSpec spec;
        spec.phi = Bump{{domain.radius() + domain.collar() / 2, 0},
                        0.45 * domain.collar(), 1};
        spec.m_tilde = disc.angles.M / 2;
        auto lad = remainder_ladder(disc, q, k, spec, lambdas, opts);
        spec.kind = ProbeCase::b;
        spec.squared = false;
        auto rec = weak_time_decay(disc, q, k,
                                   case_b_source(q, k, spec, disc), lambdas,
                                   opts);
        std::vector<double> rn;
        std::vector<double> wn;
        std::vector<double> sn;
        for (auto const& r : lad)
            rn.push_back(r.norm);
        for (auto const& r : rec)
        {
            wn.push_back(r.w_norm);
            sn.push_back(r.s_norm);
        }
        bool rpass = true;
        bool wpass = true;
        for (size_t i = 1; i < rn.size(); ++i)
        {
            rpass = rpass && rn[i] < rn[i - 1];
            wpass = wpass && wn[i] < wn[i - 1];
        }
        all_pass = all_pass && rpass && wpass;
        report["remainder_ladder"] = {{"h", disc.grid.h},
                                      {"M", disc.angles.M},
                                      {"lambda", lambdas},
                                      {"skipped_lambda", skipped},
                                      {"norm", rn},
                                      {"pass", rpass}};
        report["weak_time_decay"] = {{"h", disc.grid.h},
                                     {"M", disc.angles.M},
                                     {"lambda", lambdas},
                                     {"w_norm", wn},
                                     {"s_norm", sn},
                                     {"pass", wpass}};
        atomic_write(ctx.path("verify_decay.svg"),
                     svg_plot("Decay in lambda", "lambda", "log10 norm",
                              {{"remainder", lambdas, rn},
                               {"w", lambdas, wn},
                               {"S", lambdas, sn}},
                              true));
    }
    report["pass"] = all_pass;
    write_artifact(ctx.path("report.json"), report, ctx.resolved);
    std::printf("verify: %s -> %s\n", all_pass ? "all suites pass"
                                                : "some suites fail",
                ctx.path("report.json").c_str());
    return all_pass ? 0 : 2;
}

//---------------------------------------------------------------------------//
int run_oracle(Context const& ctx)
{
    json out = json::object();

    // Poisson weights: raw discrete mass against (1 + r^M) / (1 - r^M)
    {
        auto angles = build_angular_grid(ctx.cfg.M);
        double r = ctx.cfg.r;
        auto w = poisson_weights(angles, r, 0, false);
        double mass = 0;
        for (int m = 0; m < angles.M; ++m)
            mass += angles.weights[m] * w[m];
        double rM = std::pow(r, angles.M);
        out["poisson_mass"] = {{"r", r},
                               {"M", angles.M},
                               {"discrete", mass},
                               {"closed_form", (1 + rM) / (1 - rM)}};
    }

    // Design entries against a dense tensor trapezoid with exact chords
    {
        json dj = read_json(ctx.design_path());
        DesignResult d = design_from_json(dj);
        Basis basis = default_basis(make_domain(ctx.cfg));
        auto angles = build_angular_grid(dj.at("M").get<int>());
        json rows = json::array();
        double worst = 0;
        for (int j = 0; j < d.k(); ++j)
        {
            Bump const& phi = d.bumps[j];
            Vec2 om = angles.directions[d.directions[j]];
            constexpr int n = 800;
            double step = 2 * phi.width / n;
            Eigen::Vector3d sum = Eigen::Vector3d::Zero();
            for (int a = 0; a <= n; ++a)
            {
                for (int b = 0; b <= n; ++b)
                {
                    Vec2 y = phi.center
                             + Vec2{-phi.width + a * step,
                                    -phi.width + b * step};
                    double p = phi(y);
                    double bb = dot(y, om);
                    double disc = bb * bb - dot(y, y) + 1;
                    if (p == 0 || disc <= 0)
                        continue;
                    double len = 2 * std::sqrt(disc);
                    Vec2 mid = y - bb * om;
                    sum += p * p * len * Eigen::Vector3d(1, mid.x, mid.y);
                }
            }
            sum *= step * step;
            double scale = sum.cwiseAbs().maxCoeff();
            for (int i = 0; i < 3; ++i)
                worst = std::max(worst, std::abs(d.A(j, i) - sum(i)) / scale);
            rows.push_back({sum(0), sum(1), sum(2)});
        }
        out["design_entries"] = {{"oracle", rows},
                                 {"max_relative_deviation", worst}};
    }

    // Chord delays of the vacuum problem
    {
        json delays = json::array();
        for (double a : {0.0, 0.7, 2.0})
        {
            Vec2 x{0.4 * a * std::cos(a), 0.4 * a * std::sin(a)};
            Vec2 om{std::cos(2 * a + 1), std::sin(2 * a + 1)};
            double b = dot(x, om);
            delays.push_back(
                {{"x", {x.x, x.y}},
                 {"omega", {om.x, om.y}},
                 {"exit_time", exit_time(make_domain(ctx.cfg), x, om)},
                 {"closed_form", -b + std::sqrt(b * b - dot(x, x) + 1)}});
        }
        out["chord_delays"] = delays;
    }
    write_artifact(ctx.path("oracle.json"), out, ctx.resolved);
    std::printf("oracle: -> %s\n", ctx.path("oracle.json").c_str());
    return 0;
}

//---------------------------------------------------------------------------//
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Time-dependent linear transport: probes, design and "
                 "coefficient identification"};
    app.require_subcommand(1);
    std::string config_path;
    std::string output_dir;
    auto add = [&](char const* name, char const* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "experiment config (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("-o,--output", output_dir,
                        "override the config output directory");
        return sub;
    };
    auto* design = add("design", "select probes and emit the design JSON");
    auto* simulate = add("simulate", "forward runs; emit measurement CSV");
    auto* idq = add("identify-q", "recover q from case-a measurements");
    auto* idc = add("identify-c", "recover c from case-b measurements");
    auto* verify = add("verify", "run the invariant suites");
    auto* oracle = add("oracle", "evaluate brute-force quadrature oracles");
    app.add_subcommand("schema", "print the config JSON schema")
        ->callback([] { std::cout << config_schema().dump(2) << "\n"; });

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        std::fprintf(stderr, "error: %s\n\n%s", e.what(),
                     app.help().c_str());
        return e.get_exit_code() ? e.get_exit_code() : 2;
    }
    if (config_path.empty())
        return 0;

    Context ctx;
    try
    {
        ctx.cfg = load_config(config_path);
    }
    catch (ConfigError const& e)
    {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }
    if (!output_dir.empty())
        ctx.cfg.output_dir = output_dir;
    ctx.dir = ctx.cfg.output_dir;
    ctx.resolved = to_json(ctx.cfg);
    if (ctx.cfg.threads > 0)
        setenv("LTID_NUM_THREADS", std::to_string(ctx.cfg.threads).c_str(), 1);

    try
    {
        if (*design)
            return run_design(ctx);
        if (*simulate)
            return run_simulate(ctx);
        if (*idq)
            return run_identify(ctx, ProbeCase::a);
        if (*idc)
            return run_identify(ctx, ProbeCase::b);
        if (*verify)
            return run_verify(ctx);
        if (*oracle)
            return run_oracle(ctx);
    }
    catch (std::exception const& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
