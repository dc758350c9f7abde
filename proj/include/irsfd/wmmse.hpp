// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "irsfd/counters.hpp"
#include "irsfd/types.hpp"

namespace irsfd {

/// Closed-form DL mean-square error of user k with decoding scalar u1[k].
double mse_dl(std::size_t k, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

/// Closed-form UL mean-square error of user l with combiner u[l].
double mse_ul(std::size_t l, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

/// MMSE decoding scalar of DL user k.
cplx update_u1k(std::size_t k, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

/// MMSE combiner of UL user l, obtained by a Cholesky solve.
CVec update_ul(std::size_t l, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg,
               OpCounters* counters = nullptr);

/// mu = 1/e for every user. Throws SolverError if some e <= 1e-12.
std::pair<RVec, RVec> update_weights(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

/// Weighted-MSE objective sum alpha beta (mu e - ln mu).
double wmmse_objective(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

/// Quadratic beamformer subproblem  min sum_k w_k^H A w_k - 2 Re(rhs_k^H w_k)
/// subject to sum_k |w_k|^2 <= P, in the eigenbasis of A.
struct BeamformerSubproblem {
  CMat a_matrix;
  CMat eigvecs_pos;              // T_1, N_t x N_tau
  RVec eigvals_pos;              // diagonal of Lambda_1
  CMat eigvecs_null;             // orthonormal basis of the remaining directions
  std::vector<CVec> rhs;         // [k]
  std::vector<double> rhs_scale; // [k] |alpha_1 sqrt(xi xi) beta_k mu_k u1_k|^2
  std::vector<CMat> h_tilde;     // [k] T_1^H h_bar_k h_bar_k^H T_1
  std::vector<CVec> rhs_range;   // [k] T_1^H rhs_k
  std::vector<CVec> rhs_null;    // [k] component of rhs_k outside the range of A

  std::size_t rank() const { return static_cast<std::size_t>(eigvals_pos.size()); }
  /// True when some rhs has a non-negligible component outside range(A).
  bool has_null_mass() const;
};

BeamformerSubproblem build_beamformer_subproblem(const SolverState& state, const EffectiveChannels& eff,
                                                 const SystemConfig& cfg, OpCounters* counters = nullptr);

/// w_k(lambda) = (A + lambda I)^{-1} rhs_k. Null-space components scale as
/// 1/lambda; at lambda = 0 they must vanish or SolverError is thrown.
std::vector<CVec> w_of_lambda(const BeamformerSubproblem& sub, double lambda);

/// J(lambda) = sum_k |w_k(lambda)|^2 from the spectral formula. Returns
/// +infinity at lambda = 0 when a null-space component is present.
double j_of_lambda(const BeamformerSubproblem& sub, double lambda);

/// Upper bisection bracket sqrt(sum_k |rhs_k|^2 / P).
double lambda_upper_bound(const BeamformerSubproblem& sub, double p_max_bs);

struct BeamformerSolution {
  std::vector<CVec> w;
  double lambda = 0.0;
  int bisection_steps = 0;
};

/// Complementary-slackness solve: lambda = 0 when J(0) <= P, otherwise the
/// bisection root of J(lambda) = P, returned from the feasible side.
BeamformerSolution solve_beamformer(const BeamformerSubproblem& sub, double p_max_bs, double tol = 1e-10,
                                    OpCounters* counters = nullptr);

/// Stationary UL amplitude of user l, clamped to [0, sqrt(P_max^l)].
double update_power(std::size_t l, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

/// MRT beamformers with an equal power split, full UL power, unit weights,
/// and receivers from one MMSE pass.
SolverState initial_state(const EffectiveChannels& eff, const SystemConfig& cfg);

/// Recomputes u1 and u (MMSE receivers) for the current transmit variables.
void refresh_receivers(SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg,
                       OpCounters* counters = nullptr);

struct Algorithm1Options {
  double eps1 = 1e-3;
  int max_iter = 200;
  double bisection_tol = 1e-10;
};

struct Algorithm1Report {
  int iterations = 0;
  bool converged = false;
  std::vector<double> swsr_trace;       // after each full cycle, receivers refreshed
  std::vector<double> objective_trace;  // after each full cycle
  /// Objective after every block update: 5 entries (u1, u, mu, w, p) per cycle,
  /// preceded by the starting value.
  std::vector<double> update_trace;
  SolverState state;
};

/// Alternating block updates u1 -> u -> mu -> w -> p until the SWSR change is
/// below eps1. The returned state has receivers matched to its transmit side.
Algorithm1Report run_algorithm1(const SolverState& state0, const EffectiveChannels& eff, const SystemConfig& cfg,
                                const Algorithm1Options& options = {}, OpCounters* counters = nullptr);

}  // namespace irsfd
