//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file tools/Config.cc
//---------------------------------------------------------------------------//
#include "Config.hh"

#include <fstream>
#include <set>

namespace ltid::app
{
namespace
{
using nlohmann::json;

//---------------------------------------------------------------------------//
/*!
 * Reads one JSON object, collecting type and range errors by path.
 */
class Reader
{
  public:
    Reader(json const& j, std::string path, std::vector<std::string>& errors)
        : j_(j), path_(std::move(path)), errors_(errors)
    {
        if (!j_.is_object())
            fail(path_.empty() ? "(root)" : path_, "must be an object");
    }

    template<class T, class Check>
    void get(char const* key, T& out, Check check, char const* requirement)
    {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key))
            return;
        auto const& v = j_.at(key);
        T value;
        try
        {
            if constexpr (std::is_same_v<T, bool>)
            {
                if (!v.is_boolean())
                    throw std::invalid_argument("");
            }
            else if constexpr (std::is_arithmetic_v<T>)
            {
                if (!v.is_number())
                    throw std::invalid_argument("");
                if (std::is_integral_v<T> && !v.is_number_integer()
                    && !v.is_number_unsigned())
                    throw std::invalid_argument("");
            }
            value = v.get<T>();
        }
        catch (std::exception const&)
        {
            fail(join(key), std::string("has the wrong type (expected ")
                                + type_name<T>() + ")");
            return;
        }
        if (!check(value))
        {
            fail(join(key), requirement);
            return;
        }
        out = value;
    }

    template<class T>
    void get(char const* key, T& out)
    {
        get(key, out, [](T const&) { return true; }, "");
    }

    Reader child(char const* key)
    {
        seen_.insert(key);
        static json const empty = json::object();
        if (j_.is_object() && j_.contains(key))
            return Reader(j_.at(key), join(key), errors_);
        return Reader(empty, join(key), errors_);
    }

    bool has(char const* key) const
    {
        return j_.is_object() && j_.contains(key);
    }

    void fail(std::string const& field, std::string const& message)
    {
        errors_.push_back(field + ": " + message);
    }

    //! Report keys that the schema does not define
    void finish()
    {
        if (!j_.is_object())
            return;
        for (auto const& [key, value] : j_.items())
        {
            if (!seen_.count(key))
                fail(join(key.c_str()), "unknown field");
        }
    }

    std::string join(char const* key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

  private:
    template<class T>
    static char const* type_name()
    {
        if constexpr (std::is_same_v<T, bool>)
            return "boolean";
        else if constexpr (std::is_integral_v<T>)
            return "integer";
        else if constexpr (std::is_floating_point_v<T>)
            return "number";
        else if constexpr (std::is_same_v<T, std::string>)
            return "string";
        else
            return "array of numbers";
    }

    json const& j_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

bool positive(double v)
{
    return v > 0;
}

bool nonnegative(double v)
{
    return v >= 0;
}

void read_field(Reader r, FieldConfig& f)
{
    r.get("beta", f.beta,
          [](std::vector<double> const& b) { return b.size() == 3; },
          "must have 3 entries (1, x1, x2)");
    r.get("radial", f.radial);
    r.finish();
}

json field_json(FieldConfig const& f)
{
    return {{"beta", f.beta}, {"radial", f.radial}};
}

//---------------------------------------------------------------------------//
}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid config:";
        for (auto const& e : errors)
            msg += "\n  " + e;
        return msg;
    }())
    , errors_(std::move(errors))
{
}

//---------------------------------------------------------------------------//
ExperimentConfig parse_config(json const& j)
{
    ExperimentConfig cfg;
    std::vector<std::string> errors;
    Reader root(j, "", errors);

    int version = 0;
    root.get("schema_version", version);
    if (!root.has("schema_version"))
        root.fail("schema_version", "is required");
    else if (version != schema_version)
        root.fail("schema_version",
                  "unsupported version " + std::to_string(version));

    root.get("output_dir", cfg.output_dir);
    root.get("threads", cfg.threads, nonnegative, "must be >= 0");

    {
        auto r = root.child("domain");
        r.get("horizon", cfg.horizon, [](double T) { return T > 2; },
              "must exceed the disk diameter 2");
        r.finish();
    }
    {
        auto r = root.child("grid");
        r.get("h", cfg.h, positive, "must be positive");
        r.get("dt", cfg.dt, nonnegative, "must be >= 0 (0 selects h/2)");
        r.get("M", cfg.M, [](int m) { return m >= 4 && m % 2 == 0; },
              "must be an even integer >= 4");
        r.get("n_boundary", cfg.n_boundary, nonnegative, "must be >= 0");
        std::string interp = "bicubic";
        r.get("interpolation", interp,
              [](std::string const& s) {
                  return s == "bilinear" || s == "bicubic";
              },
              "must be \"bilinear\" or \"bicubic\"");
        cfg.interpolation = interp == "bilinear" ? Interpolation::bilinear
                                                 : Interpolation::bicubic;
        r.finish();
    }
    {
        auto r = root.child("coefficients");
        read_field(r.child("q"), cfg.q);
        read_field(r.child("c"), cfg.c);
        r.get("g", cfg.g, [](double g) { return std::abs(g) < 1; },
              "must lie in (-1, 1)");
        r.finish();
    }
    {
        auto r = root.child("design");
        std::string kind = "a";
        r.get("case", kind,
              [](std::string const& s) { return s == "a" || s == "b"; },
              "must be \"a\" or \"b\"");
        cfg.kind = kind == "b" ? ProbeCase::b : ProbeCase::a;
        r.get("pool_directions", cfg.pool_directions,
              [](int n) { return n >= 1; }, "must be >= 1");
        r.get("pool_centers", cfg.pool_centers, [](int n) { return n >= 1; },
              "must be >= 1");
        r.get("cond_threshold", cfg.cond_threshold,
              [](double v) { return v >= 1; }, "must be >= 1");
        r.get("seed", cfg.seed);
        r.finish();
    }
    {
        auto r = root.child("probe");
        r.get("lambda", cfg.lambda, positive, "must be positive");
        r.get("r", cfg.r, [](double v) { return v > 0 && v < 1; },
              "must lie in (0, 1)");
        r.finish();
    }
    {
        auto r = root.child("measurement");
        r.get("refine", cfg.refine_measurements);
        r.get("noise", cfg.noise, nonnegative, "must be >= 0");
        r.get("noise_seed", cfg.noise_seed);
        r.finish();
    }
    {
        auto r = root.child("identify");
        std::string mode = "iterative";
        r.get("mode", mode,
              [](std::string const& s) {
                  return s == "iterative" || s == "ballistic";
              },
              "must be \"iterative\" or \"ballistic\"");
        cfg.mode = mode == "ballistic" ? ReconstructionMode::ballistic
                                       : ReconstructionMode::iterative;
        r.get("max_iter", cfg.max_iter, [](int n) { return n >= 1; },
              "must be >= 1");
        r.get("tol", cfg.tol, nonnegative, "must be >= 0 (0 selects 1e-4 M)");
        r.get("design", cfg.design_path);
        r.get("measurements", cfg.measurement_path);
        r.finish();
    }
    {
        auto r = root.child("verify");
        r.get("h", cfg.verify_h,
              [](std::vector<double> const& v) {
                  if (v.empty())
                      return false;
                  for (double x : v)
                      if (!(x > 0))
                          return false;
                  return true;
              },
              "must be a nonempty list of positive spacings");
        r.get("M", cfg.verify_M, [](int m) { return m >= 4 && m % 2 == 0; },
              "must be an even integer >= 4");
        r.get("lambdas", cfg.verify_lambdas,
              [](std::vector<double> const& v) { return !v.empty(); },
              "must be a nonempty list");
        r.finish();
    }
    root.finish();

    if (!errors.empty())
        throw ConfigError(std::move(errors));
    return cfg;
}

ExperimentConfig load_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError({path + ": cannot open file"});
    json j;
    try
    {
        in >> j;
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError({path + ": " + e.what()});
    }
    return parse_config(j);
}

json to_json(ExperimentConfig const& cfg)
{
    return {
        {"schema_version", schema_version},
        {"output_dir", cfg.output_dir},
        {"threads", cfg.threads},
        {"domain", {{"horizon", cfg.horizon}}},
        {"grid",
         {{"h", cfg.h},
          {"dt", cfg.dt},
          {"M", cfg.M},
          {"n_boundary", cfg.n_boundary},
          {"interpolation", cfg.interpolation == Interpolation::bilinear
                                ? "bilinear"
                                : "bicubic"}}},
        {"coefficients",
         {{"q", field_json(cfg.q)}, {"c", field_json(cfg.c)}, {"g", cfg.g}}},
        {"design",
         {{"case", cfg.kind == ProbeCase::b ? "b" : "a"},
          {"pool_directions", cfg.pool_directions},
          {"pool_centers", cfg.pool_centers},
          {"cond_threshold", cfg.cond_threshold},
          {"seed", cfg.seed}}},
        {"probe", {{"lambda", cfg.lambda}, {"r", cfg.r}}},
        {"measurement",
         {{"refine", cfg.refine_measurements},
          {"noise", cfg.noise},
          {"noise_seed", cfg.noise_seed}}},
        {"identify",
         {{"mode", cfg.mode == ReconstructionMode::ballistic ? "ballistic"
                                                             : "iterative"},
          {"max_iter", cfg.max_iter},
          {"tol", cfg.tol},
          {"design", cfg.design_path},
          {"measurements", cfg.measurement_path}}},
        {"verify",
         {{"h", cfg.verify_h},
          {"M", cfg.verify_M},
          {"lambdas", cfg.verify_lambdas}}},
    };
}

json config_schema()
{
    auto num = [](char const* doc) {
        return json{{"type", "number"}, {"description", doc}};
    };
    auto integer = [](char const* doc) {
        return json{{"type", "integer"}, {"description", doc}};
    };
    auto str = [](char const* doc) {
        return json{{"type", "string"}, {"description", doc}};
    };
    auto object = [](json props) {
        return json{{"type", "object"},
                    {"additionalProperties", false},
                    {"properties", std::move(props)}};
    };
    json field = object(
        {{"beta",
          {{"type", "array"},
           {"items", {{"type", "number"}}},
           {"minItems", 3},
           {"maxItems", 3},
           {"description", "coefficients of 1, x1, x2 (per unit length)"}}},
         {"radial", num("amplitude of |x|^2 - 1/2, outside the basis span")}});
    json numbers = {{"type", "array"}, {"items", {{"type", "number"}}}};

    json schema = object({
        {"schema_version", integer("must be 1")},
        {"output_dir", str("directory for artifacts")},
        {"threads", integer("worker threads, 0 uses LTID_NUM_THREADS or all")},
        {"domain",
         object({{"horizon", num("final time T (time units), > 2")}})},
        {"grid",
         object({{"h", num("spatial spacing (domain units)")},
                 {"dt", num("time step (time units), 0 selects h/2")},
                 {"M", integer("number of ordinates, even")},
                 {"n_boundary",
                  integer("boundary nodes, 0 selects about 2 pi / h")},
                 {"interpolation", str("bilinear | bicubic")}})},
        {"coefficients",
         object({{"q", field},
                 {"c", field},
                 {"g", num("Henyey-Greenstein anisotropy, 0 is isotropic")}})},
        {"design",
         object({{"case", str("a (identify q) | b (identify c)")},
                 {"pool_directions", integer("directions in the pool")},
                 {"pool_centers", integer("bump centers in the pool")},
                 {"cond_threshold", num("largest accepted condition number")},
                 {"seed", integer("pool shuffle seed")}})},
        {"probe",
         object({{"lambda", num("probe frequency (rad/time)")},
                 {"r", num("Poisson concentration for case b, in (0, 1)")}})},
        {"measurement",
         object({{"refine", {{"type", "boolean"},
                             {"description",
                              "simulate on the refined grid and subsample"}}},
                 {"noise", num("relative complex Gaussian noise level")},
                 {"noise_seed", integer("noise seed")}})},
        {"identify",
         object({{"mode", str("iterative | ballistic")},
                 {"max_iter", integer("iteration cap")},
                 {"tol", num("update tolerance, 0 selects 1e-4 M")},
                 {"design", str("design JSON (default output_dir/design.json)")},
                 {"measurements",
                  str("measurement CSV (default output_dir/measurements.csv)")}})},
        {"verify",
         object({{"h", numbers},
                 {"M", integer("ordinates for the verification suites")},
                 {"lambdas", numbers}})},
    });
    schema["$schema"] = "https://json-schema.org/draft/2020-12/schema";
    schema["title"] = "ltid experiment config";
    schema["required"] = {"schema_version"};
    return schema;
}

//---------------------------------------------------------------------------//
Domain make_domain(ExperimentConfig const& cfg)
{
    return Domain::unit_disk(cfg.horizon);
}

Discretization make_disc(ExperimentConfig const& cfg)
{
    return make_discretization(make_domain(cfg),
                               GridSpec{cfg.h, cfg.dt, cfg.M, cfg.n_boundary});
}

SolveOptions make_solve_options(ExperimentConfig const& cfg)
{
    SolveOptions opts;
    opts.interpolation = cfg.interpolation;
    return opts;
}

CoefficientField make_field(FieldConfig const& f, Basis const& basis)
{
    Eigen::VectorXd beta = Eigen::Map<Eigen::VectorXd const>(
        f.beta.data(), static_cast<Eigen::Index>(f.beta.size()));
    if (f.radial == 0)
        return combine(basis, beta);
    CoefficientField base = combine(basis, beta);
    double a = f.radial;
    CoefficientField sum(
        [base, a](Vec2 x) { return base(x) + a * (dot(x, x) - 0.5); },
        "combination+radial");
    return sum.interior(basis.domain);
}

PhaseFunction make_phase(ExperimentConfig const& cfg)
{
    return cfg.g == 0 ? isotropic_phase() : henyey_greenstein(cfg.g);
}

//---------------------------------------------------------------------------//
}  // namespace ltid::app
