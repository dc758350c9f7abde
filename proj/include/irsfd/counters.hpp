// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>

namespace irsfd {

/// Operation tallies used for complexity reporting. Solvers bump these when a
/// non-null pointer is supplied.
struct OpCounters {
  std::uint64_t matrix_solves = 0;
  std::uint64_t eigendecompositions = 0;
  std::uint64_t bisection_steps = 0;
  std::uint64_t gradient_evals = 0;
  std::uint64_t objective_evals = 0;

  OpCounters& operator+=(const OpCounters& o) {
    matrix_solves += o.matrix_solves;
    eigendecompositions += o.eigendecompositions;
    bisection_steps += o.bisection_steps;
    gradient_evals += o.gradient_evals;
    objective_evals += o.objective_evals;
    return *this;
  }
};

}  // namespace irsfd
