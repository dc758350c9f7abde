// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irsfd/counters.hpp"
#include "irsfd/types.hpp"

namespace irsfd {

/// 1: joint phases + transceivers, 2: fixed phases, 3: no surfaces,
/// 4: MRT/MRC at full power with phase optimization only.
enum class SchemeKind { Joint = 1, FixedPhases = 2, NoIrs = 3, MrtMrc = 4 };

enum class Duplex { Full, Half };

struct Scheme {
  SchemeKind kind = SchemeKind::Joint;
  Duplex duplex = Duplex::Full;
};

/// Parses 1..4; throws ConfigError otherwise.
SchemeKind scheme_from_int(int n);
std::string to_string(SchemeKind kind);
std::string to_string(Duplex duplex);

struct Tolerances {
  double eps1 = 1e-3;  // WMMSE SWSR change
  double eps2 = 1e-4;  // phase-gradient norm
  double eps3 = 1e-3;  // outer SWSR change
  int max_outer = 100;
  int max_wmmse_iter = 200;
  int max_ascent_iter = 500;
  double bisection_tol = 1e-10;
};

struct RunOptions {
  Tolerances tol;
  /// Starting phases. Default: all zeros. Used as the fixed phases of scheme 2.
  std::optional<PhaseVector> initial_phases;
};

/// Uniform random phases in [0, 2pi) from an explicit (seed, stream).
PhaseVector random_phases(std::size_t m, std::uint64_t seed, std::uint64_t stream);

struct RunResult {
  Scheme scheme;
  double swsr = 0.0;
  RVec dl_rates;
  RVec ul_rates;
  double dl_sum_rate = 0.0;
  double ul_sum_rate = 0.0;
  /// SWSR at the start and after every outer iteration. For schemes 2 and 3
  /// this is the WMMSE per-cycle trace.
  std::vector<double> trace;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<int> wmmse_iterations;
  std::vector<int> ascent_iterations;
  double wall_time_s = 0.0;
  OpCounters counters;
  PhaseVector phases;
  SolverState state;
};

/// Runs one scheme. Half-duplex schemes are forwarded to run_half_duplex.
RunResult run_algorithm2(const ChannelSet& channels, const SystemConfig& cfg, const Scheme& scheme,
                         const RunOptions& options = {});

/// DL-only and UL-only problems solved separately with full per-slot power;
/// all rates are halved for the two equal time slots.
RunResult run_half_duplex(const ChannelSet& channels, const SystemConfig& cfg, SchemeKind kind,
                          const RunOptions& options = {});

}  // namespace irsfd
