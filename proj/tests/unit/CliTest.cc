//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file CliTest.cc
//---------------------------------------------------------------------------//
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "Artifacts.hh"
#include "Config.hh"
#include "doctest.h"

using namespace ltid;
using namespace ltid::app;
using nlohmann::json;

TEST_CASE("fnv1a reference values")
{
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
    CHECK(hex(0xafull) == "00000000000000af");
}

TEST_CASE("config defaults and round trip")
{
    auto cfg = parse_config(json{{"schema_version", 1}});
    CHECK(cfg.M == 64);
    CHECK(cfg.lambda == 40);
    CHECK(cfg.q.beta.size() == 3);
    auto again = parse_config(to_json(cfg));
    CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("config errors are listed per field")
{
    json j = {{"schema_version", 1},
              {"grid", {{"h", -1}, {"M", 7}, {"extra", 1}}},
              {"coefficients", {{"q", {{"beta", {1, 2}}}}, {"g", 1.5}}},
              {"probe", {{"lambda", "fast"}}}};
    try
    {
        parse_config(j);
        FAIL("expected a config error");
    }
    catch (ConfigError const& e)
    {
        auto const& errs = e.errors();
        auto has = [&](std::string const& prefix) {
            return std::any_of(errs.begin(), errs.end(),
                               [&](std::string const& s) {
                                   return s.rfind(prefix, 0) == 0;
                               });
        };
        CHECK(errs.size() == 6);
        CHECK(has("grid.h:"));
        CHECK(has("grid.M:"));
        CHECK(has("grid.extra: unknown field"));
        CHECK(has("coefficients.q.beta:"));
        CHECK(has("coefficients.g:"));
        CHECK(has("probe.lambda: has the wrong type"));
    }
    CHECK_THROWS_AS(parse_config(json::object()), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"schema_version", 2}}), ConfigError);
}

TEST_CASE("atomic artifacts embed config and hash")
{
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "ltid_cli_test";
    fs::remove_all(dir);
    std::string path = (dir / "a.json").string();
    json config = to_json(parse_config(json{{"schema_version", 1}}));
    write_artifact(path, {{"value", 1.5}}, config);
    json j = read_json(path);
    CHECK(j["config"] == config);
    std::string hash = j["hash"]["value"];
    j.erase("hash");
    CHECK(hash == hex(fnv1a(j.dump())));
    // No temporaries left behind
    int files = 0;
    for ([[maybe_unused]] auto const& e : fs::directory_iterator(dir))
        ++files;
    CHECK(files == 1);
    fs::remove_all(dir);
}

TEST_CASE("vacuum measurement CSV follows the chord delay")
{
    Domain dom = Domain::unit_disk(2.4);
    Basis basis = default_basis(dom);
    auto disc = make_discretization(dom, GridSpec{1.0 / 32, 0, 32});
    DesignOptions opts;
    opts.cond_threshold = 1e3;
    auto design = select_design(basis, disc.angles, opts);
    auto probes = design_probes(design, 20);
    auto set = simulate_measurements(disc, {}, {}, probes);
    std::string csv = measurements_csv(set, disc);

    // Free streaming carries the probe unchanged: at exit point sigma the
    // flux is phi^2(sigma - t omega) exp(i lambda (t - omega.sigma))
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "probe_id,step,t,ordinate_index,boundary_index,re,im,weight");
    double worst = 0;
    double peak = 0;
    int rows = 0;
    while (std::getline(in, line))
    {
        long j, n, m, b;
        double t, re, im, w;
        REQUIRE(std::sscanf(line.c_str(), "%ld,%ld,%lf,%ld,%ld,%lf,%lf,%lf",
                            &j, &n, &t, &m, &b, &re, &im, &w)
                == 8);
        Vec2 om = disc.angles.directions[m];
        Vec2 s = disc.grid.boundary[b].sigma;
        double amp = probes[j].phi(s - t * om);
        Complex expected = amp * amp * std::polar(1.0, 20 * (t - dot(om, s)));
        worst = std::max(worst, std::abs(Complex(re, im) - expected));
        peak = std::max(peak, amp * amp);
        ++rows;
    }
    CHECK(rows > 0);
    CHECK(peak > 0.1);
    CHECK(worst < 1e-12);

    auto back = parse_measurements_csv(csv, probes, disc);
    for (size_t j = 0; j < probes.size(); ++j)
    {
        int m = probes[j].m_tilde;
        for (int n = 0; n < disc.time.levels(); ++n)
            for (int b : disc.split.outgoing[m])
                CHECK(back.records[j].flux.at(n, m, b)
                      == set.records[j].flux.at(n, m, b));
    }
    CHECK_THROWS(parse_measurements_csv("bad header\n", probes, disc));
}
