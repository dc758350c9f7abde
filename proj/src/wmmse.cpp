// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include "irsfd/wmmse.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "irsfd/error.hpp"
#include "irsfd/model.hpp"

namespace irsfd {

namespace {

constexpr double kRankThreshold = 1e-10;
constexpr double kNullMassThreshold = 1e-10;
constexpr double kMinMse = 1e-12;
constexpr int kMaxBracketDoublings = 60;
constexpr int kMaxBisectionSteps = 400;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void bump(OpCounters* c, std::uint64_t OpCounters::*field, std::uint64_t n = 1) {
  if (c != nullptr) c->*field += n;
}

// Total received power at DL user k (every term of the MSE quadratic).
double dl_received_power(std::size_t k, const SolverState& state, const EffectiveChannels& eff,
                         const SystemConfig& cfg) {
  const auto& hw = cfg.hw;
  const CVec& h = eff.h_bar.at(k);
  double beams = 0.0;
  for (const auto& wi : state.w) beams += std::norm(h.dot(wi));
  double ul = 0.0;
  for (std::size_t l = 0; l < cfg.n_ul; ++l) ul += state.rho(l) * std::norm(eff.f_bar(idx(k), idx(l)));
  return hw.xi_bs_dl * beams + hw.bar_bs_dl() * h.squaredNorm() * state.bs_power() + ul + cfg.noise_dl;
}

// Scalar multiplying |u|^2 in the UL MSE: distortion, RSI and noise.
double ul_identity_weight(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  double ul = 0.0;
  for (std::size_t j = 0; j < cfg.n_ul; ++j) ul += eff.g_bar[j].squaredNorm() * state.rho(j);
  return cfg.hw.bar_bs_ul() * ul + state.bs_power() * cfg.rsi_variance * cfg.hw.rsi_bracket(cfg.n_tx) + cfg.noise_ul;
}

// Hermitian matrix shared by every UL combiner update.
CMat ul_combiner_matrix(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  const auto nt = idx(cfg.n_tx);
  CMat c = CMat::Zero(nt, nt);
  for (std::size_t j = 0; j < cfg.n_ul; ++j) {
    c.noalias() += (cfg.hw.xi_bs_ul * state.rho(j)) * (eff.g_bar[j] * eff.g_bar[j].adjoint());
  }
  c.diagonal().array() += ul_identity_weight(state, eff, cfg);
  return c;
}

CVec solve_combiner(const Eigen::LLT<CMat>& llt, std::size_t l, const SolverState& state, const EffectiveChannels& eff,
                    const SystemConfig& cfg) {
  const double scale = std::sqrt(cfg.hw.xi_ue_ul * cfg.hw.xi_bs_ul) * state.p(idx(l));
  if (scale == 0.0) return CVec::Zero(idx(cfg.n_tx));
  CVec u = llt.solve(scale * eff.g_bar.at(l));
  if (!u.allFinite()) throw SolverError("UL combiner solve produced non-finite values for user " + std::to_string(l));
  return u;
}

Eigen::LLT<CMat> factor_combiner(const CMat& c) {
  Eigen::LLT<CMat> llt(c);
  if (llt.info() != Eigen::Success) throw SolverError("UL combiner matrix is not positive definite");
  return llt;
}

}  // namespace

double mse_dl(std::size_t k, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  const cplx u1 = state.u1(idx(k));
  const double cross = std::real(u1 * eff.h_bar.at(k).dot(state.w.at(k)));
  return std::norm(u1) * dl_received_power(k, state, eff, cfg) -
         2.0 * std::sqrt(cfg.hw.xi_ue_dl * cfg.hw.xi_bs_dl) * cross + 1.0;
}

double mse_ul(std::size_t l, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  const CVec& u = state.u.at(l);
  double beams = 0.0;
  for (std::size_t j = 0; j < cfg.n_ul; ++j) beams += std::norm(u.dot(eff.g_bar[j])) * state.rho(j);
  const double cross = std::real(u.dot(eff.g_bar.at(l))) * state.p(idx(l));
  return cfg.hw.xi_bs_ul * beams + u.squaredNorm() * ul_identity_weight(state, eff, cfg) -
         2.0 * std::sqrt(cfg.hw.xi_ue_ul * cfg.hw.xi_bs_ul) * cross + 1.0;
}

cplx update_u1k(std::size_t k, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  // w_k^H h_bar_k = conj(h_bar_k^H w_k)
  const cplx num = std::sqrt(cfg.hw.xi_ue_dl * cfg.hw.xi_bs_dl) * state.w.at(k).dot(eff.h_bar.at(k));
  return num / dl_received_power(k, state, eff, cfg);
}

CVec update_ul(std::size_t l, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg,
               OpCounters* counters) {
  const auto llt = factor_combiner(ul_combiner_matrix(state, eff, cfg));
  bump(counters, &OpCounters::matrix_solves);
  return solve_combiner(llt, l, state, eff, cfg);
}

std::pair<RVec, RVec> update_weights(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  RVec mu_dl(idx(cfg.n_dl));
  RVec mu_ul(idx(cfg.n_ul));
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    const double e = mse_dl(k, state, eff, cfg);
    if (!(e > kMinMse)) throw SolverError("DL MSE of user " + std::to_string(k) + " is degenerate");
    mu_dl(idx(k)) = 1.0 / e;
  }
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    const double e = mse_ul(l, state, eff, cfg);
    if (!(e > kMinMse)) throw SolverError("UL MSE of user " + std::to_string(l) + " is degenerate");
    mu_ul(idx(l)) = 1.0 / e;
  }
  return {mu_dl, mu_ul};
}

double wmmse_objective(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  double dl = 0.0;
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    const double mu = state.mu_dl(idx(k));
    dl += cfg.beta_dl[k] * (mu * mse_dl(k, state, eff, cfg) - std::log(mu));
  }
  double ul = 0.0;
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    const double mu = state.mu_ul(idx(l));
    ul += cfg.beta_ul[l] * (mu * mse_ul(l, state, eff, cfg) - std::log(mu));
  }
  return cfg.alpha_dl * dl + cfg.alpha_ul * ul;
}

bool BeamformerSubproblem::has_null_mass() const {
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    if (rhs_null[k].norm() > kNullMassThreshold * rhs[k].norm()) return true;
  }
  return false;
}

BeamformerSubproblem build_beamformer_subproblem(const SolverState& state, const EffectiveChannels& eff,
                                                 const SystemConfig& cfg, OpCounters* counters) {
  const auto& hw = cfg.hw;
  const auto nt = idx(cfg.n_tx);
  BeamformerSubproblem sub;
  sub.a_matrix = CMat::Zero(nt, nt);
  double identity = 0.0;
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    const double c = cfg.beta_dl[k] * state.mu_dl(idx(k)) * std::norm(state.u1(idx(k)));
    const CVec& h = eff.h_bar[k];
    sub.a_matrix.noalias() += (cfg.alpha_dl * hw.xi_bs_dl * c) * (h * h.adjoint());
    identity += cfg.alpha_dl * hw.bar_bs_dl() * c * h.squaredNorm();
  }
  double ul = 0.0;
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    ul += cfg.beta_ul[l] * state.mu_ul(idx(l)) * state.u[l].squaredNorm();
  }
  identity += cfg.alpha_ul * cfg.rsi_variance * hw.rsi_bracket(cfg.n_tx) * ul;
  sub.a_matrix.diagonal().array() += identity;
  // Exact Hermitian symmetry before the eigensolver.
  sub.a_matrix = (0.5 * (sub.a_matrix + sub.a_matrix.adjoint())).eval();

  const double amp = cfg.alpha_dl * std::sqrt(hw.xi_ue_dl * hw.xi_bs_dl);
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    const cplx s = amp * cfg.beta_dl[k] * state.mu_dl(idx(k)) * std::conj(state.u1(idx(k)));
    sub.rhs.push_back(s * eff.h_bar[k]);
    sub.rhs_scale.push_back(std::norm(s));
  }

  Eigen::SelfAdjointEigenSolver<CMat> es(sub.a_matrix);
  bump(counters, &OpCounters::eigendecompositions);
  if (es.info() != Eigen::Success) throw SolverError("eigendecomposition of the beamformer matrix failed");
  const RVec& vals = es.eigenvalues();  // ascending
  const double top = vals.size() > 0 ? vals(vals.size() - 1) : 0.0;
  Eigen::Index n_null = 0;
  if (top > 0.0) {
    while (n_null < vals.size() && vals(n_null) <= kRankThreshold * top) ++n_null;
  } else {
    n_null = vals.size();
  }
  const Eigen::Index n_pos = vals.size() - n_null;
  sub.eigvecs_null = es.eigenvectors().leftCols(n_null);
  sub.eigvecs_pos = es.eigenvectors().rightCols(n_pos);
  sub.eigvals_pos = vals.tail(n_pos);

  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    const CVec th = sub.eigvecs_pos.adjoint() * eff.h_bar[k];
    sub.h_tilde.push_back(th * th.adjoint());
    sub.rhs_range.push_back(sub.eigvecs_pos.adjoint() * sub.rhs[k]);
    sub.rhs_null.push_back(sub.eigvecs_null.adjoint() * sub.rhs[k]);
  }
  return sub;
}

std::vector<CVec> w_of_lambda(const BeamformerSubproblem& sub, double lambda) {
  if (!(lambda >= 0.0)) throw SolverError("lambda must be nonnegative");
  const bool null_mass = sub.has_null_mass();
  if (lambda == 0.0 && null_mass) {
    throw SolverError("beamformer system is singular at lambda = 0 with rhs outside range(A)");
  }
  const RVec inv = (sub.eigvals_pos.array() + lambda).inverse().matrix();
  std::vector<CVec> w;
  w.reserve(sub.rhs.size());
  for (std::size_t k = 0; k < sub.rhs.size(); ++k) {
    CVec wk = sub.eigvecs_pos * inv.cwiseProduct(sub.rhs_range[k]);
    if (lambda > 0.0 && null_mass) wk += sub.eigvecs_null * (sub.rhs_null[k] / lambda);
    w.push_back(std::move(wk));
  }
  return w;
}

double j_of_lambda(const BeamformerSubproblem& sub, double lambda) {
  const bool null_mass = sub.has_null_mass();
  if (lambda == 0.0 && null_mass) return std::numeric_limits<double>::infinity();
  double j = 0.0;
  for (std::size_t k = 0; k < sub.rhs.size(); ++k) {
    for (Eigen::Index i = 0; i < sub.eigvals_pos.size(); ++i) {
      const double d = sub.eigvals_pos(i) + lambda;
      j += sub.rhs_scale[k] * std::real(sub.h_tilde[k](i, i)) / (d * d);
    }
    if (null_mass) j += sub.rhs_null[k].squaredNorm() / (lambda * lambda);
  }
  return j;
}

double lambda_upper_bound(const BeamformerSubproblem& sub, double p_max_bs) {
  double total = 0.0;
  for (const auto& r : sub.rhs) total += r.squaredNorm();
  return std::sqrt(total / p_max_bs);
}

BeamformerSolution solve_beamformer(const BeamformerSubproblem& sub, double p_max_bs, double tol,
                                    OpCounters* counters) {
  BeamformerSolution sol;
  if (p_max_bs <= 0.0) {
    for (const auto& r : sub.rhs) sol.w.push_back(CVec::Zero(r.size()));
    return sol;
  }
  const double j0 = j_of_lambda(sub, 0.0);
  if (j0 <= p_max_bs) {
    sol.w = w_of_lambda(sub, 0.0);
    return sol;
  }
  double hi = lambda_upper_bound(sub, p_max_bs);
  int doublings = 0;
  while (!(j_of_lambda(sub, hi) <= p_max_bs)) {
    if (++doublings > kMaxBracketDoublings) throw SolverError("bisection bracket for lambda could not be established");
    hi = hi > 0.0 ? 2.0 * hi : 1.0;
  }
  double lo = 0.0;
  for (int step = 0; step < kMaxBisectionSteps; ++step) {
    const double j_hi = j_of_lambda(sub, hi);
    if (std::abs(j_hi - p_max_bs) <= tol * p_max_bs) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket exhausted in floating point
    ++sol.bisection_steps;
    if (j_of_lambda(sub, mid) > p_max_bs) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  bump(counters, &OpCounters::bisection_steps, static_cast<std::uint64_t>(sol.bisection_steps));
  sol.lambda = hi;
  sol.w = w_of_lambda(sub, hi);
  return sol;
}

double update_power(std::size_t l, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  const auto& hw = cfg.hw;
  const CVec& g = eff.g_bar.at(l);
  double dl = 0.0;
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    dl += cfg.beta_dl[k] * state.mu_dl(idx(k)) * std::norm(state.u1(idx(k))) * std::norm(eff.f_bar(idx(k), idx(l)));
  }
  double ul_beam = 0.0;
  double ul_norm = 0.0;
  for (std::size_t j = 0; j < cfg.n_ul; ++j) {
    const double c = cfg.beta_ul[j] * state.mu_ul(idx(j));
    ul_beam += c * std::norm(state.u[j].dot(g));
    ul_norm += c * state.u[j].squaredNorm();
  }
  const double a = cfg.alpha_dl * dl + cfg.alpha_ul * (hw.xi_bs_ul * ul_beam + hw.bar_bs_ul() * g.squaredNorm() * ul_norm);
  const double b = cfg.alpha_ul * std::sqrt(hw.xi_ue_ul * hw.xi_bs_ul) * cfg.beta_ul[l] * state.mu_ul(idx(l)) *
                   std::real(state.u[l].dot(g));
  const double cap = std::sqrt(cfg.p_max_ul.at(l));
  if (b <= 0.0) return 0.0;
  if (!(a > 0.0)) return cap;
  return std::min(b / a, cap);
}

void refresh_receivers(SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg,
                       OpCounters* counters) {
  for (std::size_t k = 0; k < cfg.n_dl; ++k) state.u1(idx(k)) = update_u1k(k, state, eff, cfg);
  if (cfg.n_ul == 0) return;
  const auto llt = factor_combiner(ul_combiner_matrix(state, eff, cfg));
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    state.u[l] = solve_combiner(llt, l, state, eff, cfg);
    bump(counters, &OpCounters::matrix_solves);
  }
}

SolverState initial_state(const EffectiveChannels& eff, const SystemConfig& cfg) {
  SolverState s = SolverState::zeros(cfg);
  const double per_user = cfg.n_dl > 0 ? std::sqrt(cfg.p_max_bs / static_cast<double>(cfg.n_dl)) : 0.0;
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    const double n = eff.h_bar.at(k).norm();
    if (n > 0.0) {
      s.w[k] = (per_user / n) * eff.h_bar[k];
    } else {
      s.w[k] = CVec::Zero(idx(cfg.n_tx));
      s.w[k](0) = per_user;
    }
  }
  for (std::size_t l = 0; l < cfg.n_ul; ++l) s.p(idx(l)) = std::sqrt(cfg.p_max_ul.at(l));
  refresh_receivers(s, eff, cfg);
  return s;
}

namespace {

double swsr_with_fresh_receivers(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  SolverState copy = state;
  refresh_receivers(copy, eff, cfg);
  return swsr(copy, eff, cfg);
}

}  // namespace

Algorithm1Report run_algorithm1(const SolverState& state0, const EffectiveChannels& eff, const SystemConfig& cfg,
                                const Algorithm1Options& options, OpCounters* counters) {
  Algorithm1Report rep;
  rep.state = state0;
  SolverState& s = rep.state;
  double prev = swsr_with_fresh_receivers(s, eff, cfg);
  rep.update_trace.push_back(wmmse_objective(s, eff, cfg));

  for (int n = 1; n <= options.max_iter; ++n) {
    try {
      for (std::size_t k = 0; k < cfg.n_dl; ++k) s.u1(idx(k)) = update_u1k(k, s, eff, cfg);
      rep.update_trace.push_back(wmmse_objective(s, eff, cfg));

      if (cfg.n_ul > 0) {
        const auto llt = factor_combiner(ul_combiner_matrix(s, eff, cfg));
        for (std::size_t l = 0; l < cfg.n_ul; ++l) {
          s.u[l] = solve_combiner(llt, l, s, eff, cfg);
          bump(counters, &OpCounters::matrix_solves);
        }
      }
      rep.update_trace.push_back(wmmse_objective(s, eff, cfg));

      auto [mu_dl, mu_ul] = update_weights(s, eff, cfg);
      s.mu_dl = std::move(mu_dl);
      s.mu_ul = std::move(mu_ul);
      rep.update_trace.push_back(wmmse_objective(s, eff, cfg));

      if (cfg.n_dl > 0) {
        const auto sub = build_beamformer_subproblem(s, eff, cfg, counters);
        s.w = solve_beamformer(sub, cfg.p_max_bs, options.bisection_tol, counters).w;
        bump(counters, &OpCounters::matrix_solves);
      }
      rep.update_trace.push_back(wmmse_objective(s, eff, cfg));

      for (std::size_t l = 0; l < cfg.n_ul; ++l) s.p(idx(l)) = update_power(l, s, eff, cfg);
      rep.update_trace.push_back(wmmse_objective(s, eff, cfg));

      rep.objective_trace.push_back(rep.update_trace.back());
      const double cur = swsr_with_fresh_receivers(s, eff, cfg);
      rep.swsr_trace.push_back(cur);
      rep.iterations = n;
      if (std::abs(cur - prev) < options.eps1) {
        rep.converged = true;
        break;
      }
      prev = cur;
    } catch (const SolverError& e) {
      throw SolverError("WMMSE iteration " + std::to_string(n) + ": " + e.what());
    }
  }
  refresh_receivers(s, eff, cfg, counters);
  return rep;
}

}  // namespace irsfd
