// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "irsfd/config_io.hpp"
#include "irsfd/orchestrator.hpp"

namespace irsfd {

enum class ExperimentKind { Convergence, SwsrVsIrsSize, SwsrVsBsPower, SwsrVsUlPower, RateRegion, Cdf, IrsLocation };

std::string to_string(ExperimentKind kind);
/// Throws ConfigError naming the "kind" field for unknown names.
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Sweep coordinate column names for a kind, in CSV order.
std::vector<std::string> coordinate_columns(ExperimentKind kind);
/// Full CSV header for a kind.
std::vector<std::string> csv_columns(ExperimentKind kind, bool include_timing);

enum class FixedPhaseRule { Zero, Random };

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::SwsrVsIrsSize;
  std::string tag;
  Scenario base;
  /// One entry per grid point. Convergence points hold {n_tx, m, n_dl, n_ul};
  /// every other kind holds a single value (see coordinate_columns).
  std::vector<std::vector<double>> grid;
  int trials = 50;
  std::vector<Scheme> schemes;
  std::uint64_t seed = 1;
  Tolerances tol;
  FixedPhaseRule fixed_phases = FixedPhaseRule::Zero;
  /// Surface moved along y = line_y by irs_location sweeps.
  std::size_t moving_irs = 0;
  double line_y = 0.0;
  bool include_timing = false;

  void validate() const;
};

/// Parses an experiment spec; unknown keys and bad values raise ConfigError
/// naming the field.
ExperimentSpec parse_experiment_spec(const nlohmann::json& j);
ExperimentSpec load_experiment_spec(const std::string& path);

struct SweepRecord {
  ExperimentKind kind = ExperimentKind::SwsrVsIrsSize;
  std::vector<double> coords;  // matches coordinate_columns(kind)
  Scheme scheme;
  int trial = 0;
  double swsr = 0.0;
  double dl_sum_rate = 0.0;
  double ul_sum_rate = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// Scenario for one grid point of the spec.
Scenario scenario_at(const ExperimentSpec& spec, std::size_t point);

/// Runs every (grid point, trial) job on up to `jobs` threads (0: hardware
/// concurrency). All schemes of a job share the channel draw of stream `trial`,
/// so grid points also see common random numbers. Rows come back grid-major,
/// then scheme, then trial, independent of the thread count.
std::vector<SweepRecord> run_experiment(const ExperimentSpec& spec, unsigned jobs = 0);

/// Writes a CSV via a temporary file renamed into place. Floats use 9
/// significant digits. Throws Error naming the path on I/O failure.
void write_records(const std::vector<SweepRecord>& records, ExperimentKind kind, const std::string& path,
                   bool include_timing = false);

/// `<kind>_<tag>.csv`, with the tag defaulting to `seed<seed>`.
std::string output_file_name(const ExperimentSpec& spec);

/// printf-style "%.9g".
std::string format_double(double x);

}  // namespace irsfd
