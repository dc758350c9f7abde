// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irsfd/types.hpp"

namespace irsfd {

/// Dimensions and hardware of a synthetic test instance.
struct InstanceShape {
  std::size_t n_tx = 4;
  std::size_t n_dl = 2;
  std::size_t n_ul = 3;
  std::vector<std::size_t> irs_sizes{2, 2};
  double xi = 1.0;
};

/// Well-scaled synthetic problem: CN(0, 1) channels, unit noise, random
/// transmit and receive variables at full power, random phases.
struct RandomInstance {
  SystemConfig cfg;
  ChannelSet channels;
  SolverState state;
  PhaseVector phases;
};

RandomInstance random_instance(const InstanceShape& shape, std::uint64_t seed, std::uint64_t stream);

struct SelftestOptions {
  std::uint64_t seed = 1;
  int instances = 8;
  std::size_t mc_samples = 200000;
  /// Test hook: flips the sign of the analytic phase gradient so the
  /// finite-difference comparison must fail.
  bool corrupt_gradient = false;
};

struct SelftestCheck {
  std::string name;
  bool passed = false;
  double metric = 0.0;     // worst observed error
  double threshold = 0.0;  // pass iff metric < threshold
};

struct SelftestReport {
  std::vector<SelftestCheck> checks;
  bool all_passed() const;
};

SelftestReport run_selftest(const SelftestOptions& options = {});

/// One aligned line per check.
std::string format_report(const SelftestReport& report);

}  // namespace irsfd
