// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#pragma once

#include <string>

#include <json.hpp>

#include "irsfd/channelgen.hpp"
#include "irsfd/types.hpp"

namespace irsfd {

/// Everything needed to draw channels and run a solver.
struct Scenario {
  SystemConfig system;
  ScenarioGeometry geometry;
};

/// N_t = 4, K = 2, L = 3, two 10-element surfaces at (+-100, 0), user disks of
/// radius 10 at (+-100, 5), 35 / 11 dBm budgets, -100 / -110 dBm noise,
/// -95 dBm RSI variance, 6 dB Rician factor, ideal hardware, unit weights.
Scenario table1_preset();

/// Named presets; throws ConfigError for unknown names.
Scenario preset(const std::string& name);

/// Resizes uniform per-user lists and disk user counts to the configured
/// K and L, then validates. Throws ConfigError on non-uniform lists of the
/// wrong length.
void normalize(Scenario& scenario);

/// Splits `total` elements as evenly as possible over the configured surfaces.
void set_total_elements(Scenario& scenario, std::size_t total);

/// Parses a scenario object. Powers are given in dBm. An optional "preset"
/// key selects the base that the remaining keys override.
Scenario parse_scenario(const nlohmann::json& j);

/// Reads and parses a scenario file; ConfigError messages name the file.
Scenario load_scenario(const std::string& path);

/// Inverse of parse_scenario (powers written in dBm).
nlohmann::json scenario_to_json(const Scenario& scenario);

/// Reads a JSON document; ConfigError names the file on failure.
nlohmann::json read_json_file(const std::string& path);

}  // namespace irsfd
