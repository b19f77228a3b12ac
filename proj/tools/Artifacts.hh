//------------------------------- -*- C++ -*- -------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file tools/Artifacts.hh
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>
#include <json.hpp>

#include "ltid/Identify.hh"

namespace ltid::app
{
//---------------------------------------------------------------------------//
//! 64-bit FNV-1a
std::uint64_t fnv1a(std::string_view data);
std::string hex(std::uint64_t value);

//! Write to a temporary file next to the target, then rename over it
void atomic_write(std::string const& path, std::string const& contents);

/*!
 * Write a JSON artifact with the resolved config and a content hash.
 *
 * The hash covers the serialized document before the "hash" key is added.
 */
void write_artifact(std::string const& path, nlohmann::json body,
                    nlohmann::json const& config);

nlohmann::json read_json(std::string const& path);

//---------------------------------------------------------------------------//
// Measurement CSV: probe_id, step, t, ordinate_index, boundary_index, re, im,
// weight. Only outgoing nodes of each probe's detection ordinate are listed;
// weight is the trapezoid time weight times |omega.nu| ds.
std::string measurements_csv(MeasurementSet const& set,
                             Discretization const& disc);

//! Rebuild fluxes for the given probes; rows must match the grid
MeasurementSet parse_measurements_csv(std::string const& text,
                                      std::vector<ProbeSpec> const& probes,
                                      Discretization const& disc);

//---------------------------------------------------------------------------//
struct Series
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

//! Static SVG line plot; log_y plots log10 of positive values
std::string svg_plot(std::string const& title, std::string const& xlabel,
                     std::string const& ylabel, std::vector<Series> const& s,
                     bool log_y);

//---------------------------------------------------------------------------//
// Design and result serialization
nlohmann::json design_json(DesignResult const& d, AngularGrid const& angles);
DesignResult design_from_json(nlohmann::json const& j);
nlohmann::json result_json(ReconstructionResult const& r);

//---------------------------------------------------------------------------//
}  // namespace ltid::app
