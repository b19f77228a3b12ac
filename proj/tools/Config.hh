//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file tools/Config.hh
//---------------------------------------------------------------------------//
#pragma once

#include <stdexcept>
#include <string>
#include <vector>
#include <json.hpp>

#include "ltid/Design.hh"
#include "ltid/Identify.hh"

namespace ltid::app
{
//---------------------------------------------------------------------------//
inline constexpr int schema_version = 1;

//! Coefficient as basis combination plus an optional (|x|^2 - 1/2) term
struct FieldConfig
{
    std::vector<double> beta;
    double radial{0};
};

struct ExperimentConfig
{
    std::string output_dir{"out"};
    int threads{0};

    // Domain: unit disk centered at the origin (lengths in domain units)
    double horizon{2.4};

    // Grid
    double h{1.0 / 64};
    double dt{0};
    int M{64};
    int n_boundary{0};
    Interpolation interpolation{Interpolation::bicubic};

    // Coefficients
    FieldConfig q{{0.5, 0, 0}, 0};
    FieldConfig c{{0.2, 0, 0}, 0};
    double g{0};

    // Design
    ProbeCase kind{ProbeCase::a};
    int pool_directions{32};
    int pool_centers{16};
    double cond_threshold{1e3};
    std::uint64_t seed{0};

    // Probes (lambda in rad/time)
    double lambda{40};
    double r{0.99};

    // Measurements
    bool refine_measurements{true};
    double noise{0};
    std::uint64_t noise_seed{0};

    // Identification
    ReconstructionMode mode{ReconstructionMode::iterative};
    int max_iter{20};
    double tol{0};
    std::string design_path;
    std::string measurement_path;

    // Verification
    std::vector<double> verify_h{1.0 / 16, 1.0 / 32};
    int verify_M{16};
    std::vector<double> verify_lambdas{10, 20, 40};
};

//! Every schema violation, one message per field
class ConfigError : public std::runtime_error
{
  public:
    explicit ConfigError(std::vector<std::string> errors);
    std::vector<std::string> const& errors() const { return errors_; }

  private:
    std::vector<std::string> errors_;
};

//! Parse and validate; missing fields take defaults
ExperimentConfig parse_config(nlohmann::json const& j);
ExperimentConfig load_config(std::string const& path);

//! Fully resolved config including defaults
nlohmann::json to_json(ExperimentConfig const& cfg);

//! Documented schema with units
nlohmann::json config_schema();

//---------------------------------------------------------------------------//
// Objects built from a config
Domain make_domain(ExperimentConfig const& cfg);
Discretization make_disc(ExperimentConfig const& cfg);
SolveOptions make_solve_options(ExperimentConfig const& cfg);
CoefficientField make_field(FieldConfig const& f, Basis const& basis);
PhaseFunction make_phase(ExperimentConfig const& cfg);

//---------------------------------------------------------------------------//
}  // namespace ltid::app
