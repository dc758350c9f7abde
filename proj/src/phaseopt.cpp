// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include "irsfd/phaseopt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "irsfd/error.hpp"
#include "irsfd/model.hpp"

namespace irsfd {

namespace {

constexpr double kMinDenominator = 1e-300;
const cplx kJ{0.0, 1.0};

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void bump(OpCounters* c, std::uint64_t OpCounters::*field) {
  if (c != nullptr) ++(c->*field);
}

QuadraticTerm scalar_term(cplx c, const CVec& row) {
  QuadraticTerm t;
  t.c = CVec::Constant(1, c);
  t.g = row.transpose();
  return t;
}

}  // namespace

double QuadraticTerm::value(const CVec& v) const { return (c + g * v).squaredNorm(); }

RVec QuadraticTerm::gradient(const CVec& v) const {
  // d|r|^2/dphi_n = 2 Re(r^H G_{:,n} j v_n)
  const CVec r = c + g * v;
  const CVec proj = g.transpose() * r.conjugate();
  return (2.0 * (kJ * v.cwiseProduct(proj)).real()).eval();
}

double quadratic_form_value(const CMat& q, const CVec& lin, double k, const CVec& v) {
  return std::real(v.dot(q * v)) + 2.0 * std::real(v.dot(lin)) + k;
}

double quadratic_form_derivative(const CMat& q, const CVec& lin, const CVec& v, std::size_t n) {
  const auto nn = idx(n);
  cplx acc = lin(nn);
  for (Eigen::Index t = 0; t < v.size(); ++t) {
    if (t != nn) acc += q(nn, t) * v(t);
  }
  return 2.0 * std::real(-kJ * std::conj(v(nn)) * acc);
}

const QuadraticTerm& QuadraticTermCache::term(const TermId& id) const {
  switch (id.kind) {
    case TermKind::B: return b.at(id.first).at(id.second);
    case TermKind::Q: return q.at(id.first);
    case TermKind::C: return c.at(id.first).at(id.second);
    case TermKind::BTilde: return b_tilde.at(id.first).at(id.second);
    case TermKind::T: return t.at(id.first);
  }
  throw DimensionError("unknown term kind");
}

QuadraticTermCache build_cache(const SolverState& state, const ChannelSet& channels, const SystemConfig& cfg) {
  channels.validate(cfg);
  const auto& hw = cfg.hw;
  const CMat h_hat = channels.stacked_bs_irs();
  QuadraticTermCache cache;
  cache.n_dl = cfg.n_dl;
  cache.n_ul = cfg.n_ul;
  cache.m = static_cast<std::size_t>(h_hat.rows());
  if (state.w.size() != cfg.n_dl || state.u.size() != cfg.n_ul || state.p.size() != idx(cfg.n_ul)) {
    throw DimensionError("solver state does not match the configured user counts");
  }

  std::vector<CVec> dl_hat(cfg.n_dl);
  std::vector<CVec> ul_hat(cfg.n_ul);
  for (std::size_t k = 0; k < cfg.n_dl; ++k) dl_hat[k] = channels.stacked_dl(k).conjugate();
  for (std::size_t l = 0; l < cfg.n_ul; ++l) ul_hat[l] = channels.stacked_ul(l);

  cache.b.resize(cfg.n_dl);
  cache.q.reserve(cfg.n_dl);
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    for (std::size_t i = 0; i < cfg.n_dl; ++i) {
      // h_hat_k^H Theta H_hat w_i = sum_n conj(h_hat_kn) (H_hat w_i)_n v_n
      const CVec row = dl_hat[k].cwiseProduct(h_hat * state.w[i]);
      cache.b[k].push_back(scalar_term(channels.h_direct[k].dot(state.w[i]), row));
    }
    QuadraticTerm qk;
    qk.c = channels.h_direct[k].conjugate();
    qk.g = h_hat.transpose() * dl_hat[k].asDiagonal();
    cache.q.push_back(std::move(qk));
  }

  cache.c.resize(cfg.n_ul);
  cache.b_tilde.resize(cfg.n_ul);
  cache.t.reserve(cfg.n_ul);
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    const double p = state.p(idx(l));
    for (std::size_t k = 0; k < cfg.n_dl; ++k) {
      const CVec row = p * dl_hat[k].cwiseProduct(ul_hat[l]);
      cache.c[l].push_back(scalar_term(p * channels.f_uu(idx(k), idx(l)), row));
    }
    const CVec hu = h_hat * state.u[l];
    for (std::size_t j = 0; j < cfg.n_ul; ++j) {
      const double pj = state.p(idx(j));
      const CVec row = pj * hu.conjugate().cwiseProduct(ul_hat[j]);
      cache.b_tilde[l].push_back(scalar_term(pj * state.u[l].dot(channels.g_direct[j]), row));
    }
    QuadraticTerm tl;
    tl.c = p * channels.g_direct[l];
    tl.g = p * (h_hat.adjoint() * ul_hat[l].asDiagonal());
    cache.t.push_back(std::move(tl));
  }

  cache.f1 = hw.xi_ue_dl * hw.xi_bs_dl;
  cache.f2 = hw.bar_ue_dl() * hw.xi_bs_dl;
  cache.f3 = hw.bar_bs_dl() * state.bs_power();
  cache.e1 = hw.xi_ue_ul * hw.xi_bs_ul;
  cache.e2 = hw.bar_ue_ul() * hw.xi_bs_ul;
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    const double un = state.u[l].squaredNorm();
    cache.e3.push_back(hw.bar_bs_ul() * un);
    cache.e4.push_back(rsi_power(state.u[l], state, cfg) + cfg.noise_ul * un);
  }
  cache.xi_bs_dl = hw.xi_bs_dl;
  cache.xi_bs_ul = hw.xi_bs_ul;
  cache.noise_dl = cfg.noise_dl;
  return cache;
}

TermValues eval_terms(const QuadraticTermCache& cache, const PhaseVector& phases) {
  if (phases.size() != cache.m) {
    throw DimensionError("phase vector length " + std::to_string(phases.size()) + " does not match M = " +
                         std::to_string(cache.m));
  }
  const CVec& v = phases.reflection();
  TermValues tv;
  tv.b.resize(cache.n_dl);
  for (std::size_t k = 0; k < cache.n_dl; ++k) {
    for (const auto& term : cache.b[k]) tv.b[k].push_back(term.value(v));
    tv.q.push_back(cache.q[k].value(v));
  }
  tv.c.resize(cache.n_ul);
  tv.b_tilde.resize(cache.n_ul);
  for (std::size_t l = 0; l < cache.n_ul; ++l) {
    for (const auto& term : cache.c[l]) tv.c[l].push_back(term.value(v));
    for (const auto& term : cache.b_tilde[l]) tv.b_tilde[l].push_back(term.value(v));
    tv.t.push_back(cache.t[l].value(v));
  }
  return tv;
}

namespace {

// Signal and interference-plus-noise of one user.
struct SinrParts {
  double s = 0.0;
  double i = 0.0;
};

SinrParts dl_parts(const QuadraticTermCache& cache, const TermValues& tv, std::size_t k) {
  SinrParts p;
  const double own = tv.b[k][k];
  p.s = cache.f1 * own;
  double others = 0.0;
  for (std::size_t i = 0; i < cache.n_dl; ++i) {
    if (i != k) others += tv.b[k][i];
  }
  double ul = 0.0;
  for (std::size_t l = 0; l < cache.n_ul; ++l) ul += tv.c[l][k];
  p.i = cache.xi_bs_dl * others + cache.f2 * own + cache.f3 * tv.q[k] + ul + cache.noise_dl;
  return p;
}

SinrParts ul_parts(const QuadraticTermCache& cache, const TermValues& tv, std::size_t l) {
  SinrParts p;
  const double own = tv.b_tilde[l][l];
  p.s = cache.e1 * own;
  double others = 0.0;
  double t_sum = 0.0;
  for (std::size_t j = 0; j < cache.n_ul; ++j) {
    if (j != l) others += tv.b_tilde[l][j];
    t_sum += tv.t[j];
  }
  p.i = cache.xi_bs_ul * others + cache.e2 * own + cache.e3[l] * t_sum + cache.e4[l];
  return p;
}

double rate_of(const SinrParts& p, const char* link, std::size_t user) {
  if (p.s == 0.0) return 0.0;
  if (!(p.i >= kMinDenominator)) {
    throw SolverError(std::string(link) + " SINR denominator of user " + std::to_string(user) + " is not positive");
  }
  return std::log2(1.0 + p.s / p.i);
}

// Derivative of log2(1 + S/I), written as (S'/I - (S/I) I'/I) / (ln2 (1 + S/I)).
// Dividing by I first keeps it finite when a shut-off UL user drives both S
// and I toward the underflow range through a vanishing combiner.
RVec rate_derivative(const SinrParts& p, const RVec& ds, const RVec& di) {
  if (p.s == 0.0 && ds.isZero(0.0)) return RVec::Zero(ds.size());
  const double sinr = p.s / p.i;
  return ((ds / p.i - (sinr / p.i) * di) / (std::numbers::ln2 * (1.0 + sinr))).eval();
}

}  // namespace

double objective_f(const QuadraticTermCache& cache, const PhaseVector& phases, const SystemConfig& cfg) {
  const TermValues tv = eval_terms(cache, phases);
  double f = 0.0;
  for (std::size_t k = 0; k < cache.n_dl; ++k) f += cfg.alpha_dl * cfg.beta_dl[k] * rate_of(dl_parts(cache, tv, k), "DL", k);
  for (std::size_t l = 0; l < cache.n_ul; ++l) f += cfg.alpha_ul * cfg.beta_ul[l] * rate_of(ul_parts(cache, tv, l), "UL", l);
  return f;
}

double term_derivative(const QuadraticTermCache& cache, const PhaseVector& phases, std::size_t n, const TermId& id) {
  if (n >= cache.m) throw DimensionError("phase index out of range");
  return cache.term(id).gradient(phases.reflection())(idx(n));
}

RateGradients rate_gradients(const QuadraticTermCache& cache, const PhaseVector& phases) {
  const TermValues tv = eval_terms(cache, phases);
  const CVec& v = phases.reflection();
  const auto m = idx(cache.m);
  RateGradients out;
  out.dl = RMat::Zero(idx(cache.n_dl), m);
  out.ul = RMat::Zero(idx(cache.n_ul), m);

  // C'_{l,k} and T'_j are shared across users; compute once.
  std::vector<std::vector<RVec>> dc(cache.n_ul);
  RVec dt_sum = RVec::Zero(m);
  for (std::size_t l = 0; l < cache.n_ul; ++l) {
    for (const auto& term : cache.c[l]) dc[l].push_back(term.gradient(v));
    dt_sum += cache.t[l].gradient(v);
  }

  for (std::size_t k = 0; k < cache.n_dl; ++k) {
    const SinrParts p = dl_parts(cache, tv, k);
    const RVec d_own = cache.b[k][k].gradient(v);
    RVec di = cache.f2 * d_own + cache.f3 * cache.q[k].gradient(v);
    for (std::size_t i = 0; i < cache.n_dl; ++i) {
      if (i != k) di += cache.xi_bs_dl * cache.b[k][i].gradient(v);
    }
    for (std::size_t l = 0; l < cache.n_ul; ++l) di += dc[l][k];
    if (p.s != 0.0 && !(p.i >= kMinDenominator)) throw SolverError("DL SINR denominator is not positive");
    out.dl.row(idx(k)) = rate_derivative(p, cache.f1 * d_own, di).transpose();
  }
  for (std::size_t l = 0; l < cache.n_ul; ++l) {
    const SinrParts p = ul_parts(cache, tv, l);
    const RVec d_own = cache.b_tilde[l][l].gradient(v);
    RVec di = cache.e2 * d_own + cache.e3[l] * dt_sum;
    for (std::size_t j = 0; j < cache.n_ul; ++j) {
      if (j != l) di += cache.xi_bs_ul * cache.b_tilde[l][j].gradient(v);
    }
    if (p.s != 0.0 && !(p.i >= kMinDenominator)) throw SolverError("UL SINR denominator is not positive");
    out.ul.row(idx(l)) = rate_derivative(p, cache.e1 * d_own, di).transpose();
  }
  return out;
}

std::pair<RVec, RVec> rate_partials(const QuadraticTermCache& cache, const PhaseVector& phases, std::size_t n) {
  if (n >= cache.m) throw DimensionError("phase index out of range");
  const RateGradients g = rate_gradients(cache, phases);
  return {g.dl.col(idx(n)), g.ul.col(idx(n))};
}

RVec gradient(const QuadraticTermCache& cache, const PhaseVector& phases, const SystemConfig& cfg) {
  const RateGradients g = rate_gradients(cache, phases);
  RVec out = RVec::Zero(idx(cache.m));
  for (std::size_t k = 0; k < cache.n_dl; ++k) out += (cfg.alpha_dl * cfg.beta_dl[k]) * g.dl.row(idx(k)).transpose();
  for (std::size_t l = 0; l < cache.n_ul; ++l) out += (cfg.alpha_ul * cfg.beta_ul[l]) * g.ul.row(idx(l)).transpose();
  return out;
}

LineSearchResult armijo_line_search(const QuadraticTermCache& cache, const PhaseVector& phases, const RVec& direction,
                                    const SystemConfig& cfg, const ArmijoParams& params, OpCounters* counters) {
  LineSearchResult res;
  const double f0 = objective_f(cache, phases, cfg);
  bump(counters, &OpCounters::objective_evals);
  res.value = f0;
  const double slope = direction.squaredNorm();
  if (slope == 0.0) {
    res.step = params.eta0;
    return res;
  }
  double eta = params.eta0;
  for (int t = 0; t <= params.max_backtracks; ++t) {
    const double f = objective_f(cache, phases.advanced(eta, direction), cfg);
    bump(counters, &OpCounters::objective_evals);
    if (f >= f0 + params.c * eta * slope) {
      res.step = eta;
      res.value = f;
      res.backtracks = t;
      return res;
    }
    eta *= params.shrink;
  }
  res.backtracks = params.max_backtracks;
  return res;
}

AscentReport gradient_ascent(const ChannelSet& channels, const SolverState& state, const PhaseVector& phases0,
                             const SystemConfig& cfg, const AscentOptions& options, OpCounters* counters) {
  const QuadraticTermCache cache = build_cache(state, channels, cfg);
  AscentReport rep;
  rep.phases = phases0;
  rep.objective_trace.push_back(objective_f(cache, rep.phases, cfg));
  RVec prev_g;
  double prev_step = 0.0;
  for (int s = 0;; ++s) {
    const RVec g = gradient(cache, rep.phases, cfg);
    bump(counters, &OpCounters::gradient_evals);
    rep.final_gradient_norm = g.norm();
    if (rep.final_gradient_norm < options.eps2) {
      rep.converged = true;
      break;
    }
    if (s >= options.max_iter) break;
    ArmijoParams params = options.armijo;
    if (options.step_rule == StepRule::BarzilaiBorwein && prev_step > 0.0) {
      // Spectral step |s's / s'y| from the last move s = step * g_prev.
      const RVec d = prev_step * prev_g;
      const double sy = d.dot(g - prev_g);
      if (std::abs(sy) > 0.0) {
        params.eta0 = std::clamp(d.squaredNorm() / std::abs(sy), options.min_trial_step, options.max_trial_step);
      }
    }
    const LineSearchResult ls = armijo_line_search(cache, rep.phases, g, cfg, params, counters);
    if (ls.step == 0.0) {
      rep.stalled = true;
      break;
    }
    prev_g = g;
    prev_step = ls.step;
    rep.phases = rep.phases.advanced(ls.step, g);
    rep.objective_trace.push_back(ls.value);
    rep.step_sizes.push_back(ls.step);
    rep.iterations = s + 1;
  }
  return rep;
}

}  // namespace irsfd
