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

/// One squared-magnitude term as a function of the reflection vector v:
///   value(v) = |c + G v|^2 = v^H (G^H G) v + 2 Re(v^H G^H c) + |c|^2.
/// Scalar terms have a single row in G; the hardware-impairment terms have
/// N_t rows.
struct QuadraticTerm {
  CVec c;
  CMat g;

  double value(const CVec& v) const;
  /// d value / d phi_n for every n.
  RVec gradient(const CVec& v) const;

  /// Expanded Hermitian form (M x M).
  CMat gram() const { return g.adjoint() * g; }
  CVec linear() const { return g.adjoint() * c; }
  double constant() const { return c.squaredNorm(); }
};

/// Expanded-form evaluation v^H Q v + 2 Re(v^H lin) + k.
double quadratic_form_value(const CMat& q, const CVec& lin, double k, const CVec& v);

/// Expanded-form partial 2 Re(-j conj(v_n) (lin_n + sum_{t != n} Q_nt v_t)).
double quadratic_form_derivative(const CMat& q, const CVec& lin, const CVec& v, std::size_t n);

enum class TermKind { B, Q, C, BTilde, T };

/// Selects one term: B(k, i), Q(k), C(l, k), BTilde(l, j) or T(j).
struct TermId {
  TermKind kind = TermKind::B;
  std::size_t first = 0;
  std::size_t second = 0;
};

/// Every phase-dependent term of the SWSR for fixed {w, u, p}.
struct QuadraticTermCache {
  std::size_t n_dl = 0;
  std::size_t n_ul = 0;
  std::size_t m = 0;

  std::vector<std::vector<QuadraticTerm>> b;       // [k][i] |h_bar_k^H w_i|^2
  std::vector<QuadraticTerm> q;                    // [k] |h_bar_k|^2
  std::vector<std::vector<QuadraticTerm>> c;       // [l][k] |f_bar_lk|^2 rho_l
  std::vector<std::vector<QuadraticTerm>> b_tilde; // [l][j] |u_l^H g_bar_j|^2 rho_j
  std::vector<QuadraticTerm> t;                    // [j] |g_bar_j|^2 rho_j

  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
  double e1 = 0.0, e2 = 0.0;
  std::vector<double> e3;  // [l]
  std::vector<double> e4;  // [l]
  double xi_bs_dl = 1.0;
  double xi_bs_ul = 1.0;
  double noise_dl = 1.0;

  const QuadraticTerm& term(const TermId& id) const;
};

QuadraticTermCache build_cache(const SolverState& state, const ChannelSet& channels, const SystemConfig& cfg);

/// Term values at the given phases.
struct TermValues {
  std::vector<std::vector<double>> b;
  std::vector<double> q;
  std::vector<std::vector<double>> c;
  std::vector<std::vector<double>> b_tilde;
  std::vector<double> t;
};

TermValues eval_terms(const QuadraticTermCache& cache, const PhaseVector& phases);

/// The SWSR as a function of the phases, with log2 rates.
double objective_f(const QuadraticTermCache& cache, const PhaseVector& phases, const SystemConfig& cfg);

double term_derivative(const QuadraticTermCache& cache, const PhaseVector& phases, std::size_t n, const TermId& id);

/// d R / d phi for every user: rows are users, columns are phase elements.
struct RateGradients {
  RMat dl;  // K x M
  RMat ul;  // L x M
};

RateGradients rate_gradients(const QuadraticTermCache& cache, const PhaseVector& phases);

/// Column n of rate_gradients.
std::pair<RVec, RVec> rate_partials(const QuadraticTermCache& cache, const PhaseVector& phases, std::size_t n);

RVec gradient(const QuadraticTermCache& cache, const PhaseVector& phases, const SystemConfig& cfg);

struct ArmijoParams {
  double eta0 = 1.0;
  double shrink = 0.5;
  double c = 1e-4;
  int max_backtracks = 40;
};

struct LineSearchResult {
  double step = 0.0;       // zero when no step satisfied the condition
  double value = 0.0;      // objective at the accepted point (or the start)
  int backtracks = 0;
};

/// Largest eta0 shrink^t with F(phi + eta d) >= F(phi) + c eta |d|^2.
LineSearchResult armijo_line_search(const QuadraticTermCache& cache, const PhaseVector& phases, const RVec& direction,
                                    const SystemConfig& cfg, const ArmijoParams& params = {},
                                    OpCounters* counters = nullptr);

/// Fixed: every line search starts from armijo.eta0. BarzilaiBorwein: after
/// the first step the trial step is the spectral estimate from the previous
/// move, clipped to [min_trial_step, max_trial_step]; backtracking is unchanged.
enum class StepRule { Fixed, BarzilaiBorwein };

struct AscentOptions {
  double eps2 = 1e-4;
  int max_iter = 500;
  ArmijoParams armijo;
  StepRule step_rule = StepRule::BarzilaiBorwein;
  double min_trial_step = 1e-6;
  double max_trial_step = 1e4;
};

struct AscentReport {
  int iterations = 0;
  bool converged = false;  // gradient norm fell below eps2
  bool stalled = false;    // line search found no admissible step
  std::vector<double> objective_trace;  // starting value, then one per step
  std::vector<double> step_sizes;
  double final_gradient_norm = 0.0;
  PhaseVector phases;
};

/// Gradient ascent on the phases for fixed {w, u, p}; the cache is built once.
AscentReport gradient_ascent(const ChannelSet& channels, const SolverState& state, const PhaseVector& phases0,
                             const SystemConfig& cfg, const AscentOptions& options = {},
                             OpCounters* counters = nullptr);

}  // namespace irsfd
