// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include "irsfd/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "irsfd/channelgen.hpp"
#include "irsfd/error.hpp"
#include "irsfd/model.hpp"
#include "irsfd/phaseopt.hpp"
#include "irsfd/wmmse.hpp"

namespace irsfd {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Algorithm1Options wmmse_options(const Tolerances& t) {
  Algorithm1Options o;
  o.eps1 = t.eps1;
  o.max_iter = t.max_wmmse_iter;
  o.bisection_tol = t.bisection_tol;
  return o;
}

AscentOptions ascent_options(const Tolerances& t) {
  AscentOptions o;
  o.eps2 = t.eps2;
  o.max_iter = t.max_ascent_iter;
  return o;
}

void fill_rates(RunResult& r, const EffectiveChannels& eff, const SystemConfig& cfg) {
  const RateSummary rates = evaluate_rates(r.state, eff, cfg);
  r.swsr = rates.swsr;
  r.dl_rates = rates.dl;
  r.ul_rates = rates.ul;
  r.dl_sum_rate = rates.dl_sum;
  r.ul_sum_rate = rates.ul_sum;
}

// MRT along h_bar with an equal power split, MRC along g_bar, full UL power.
SolverState matched_filter_state(const EffectiveChannels& eff, const SystemConfig& cfg) {
  SolverState s = initial_state(eff, cfg);
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    const double n = eff.g_bar[l].norm();
    if (n > 0.0) {
      s.u[l] = eff.g_bar[l] / n;
    } else {
      s.u[l] = CVec::Zero(idx(cfg.n_tx));
      s.u[l](0) = 1.0;
    }
  }
  return s;
}

void run_joint(RunResult& r, const ChannelSet& channels, const SystemConfig& cfg, const RunOptions& o) {
  const auto& tol = o.tol;
  EffectiveChannels eff = compose_effective_channels(channels, r.phases);
  // The fixed-phase solution at the starting phases seeds the outer loop.
  Algorithm1Report rep = run_algorithm1(initial_state(eff, cfg), eff, cfg, wmmse_options(tol), &r.counters);
  r.wmmse_iterations.push_back(rep.iterations);
  r.state = std::move(rep.state);
  double prev = swsr(r.state, eff, cfg);
  r.trace.push_back(prev);

  for (int i = 1; i <= tol.max_outer; ++i) {
    try {
      const AscentReport asc = gradient_ascent(channels, r.state, r.phases, cfg, ascent_options(tol), &r.counters);
      r.ascent_iterations.push_back(asc.iterations);
      r.phases = asc.phases;
      eff = compose_effective_channels(channels, r.phases);
      rep = run_algorithm1(r.state, eff, cfg, wmmse_options(tol), &r.counters);
    } catch (const SolverError& e) {
      throw SolverError("outer iteration " + std::to_string(i) + ": " + e.what());
    }
    r.wmmse_iterations.push_back(rep.iterations);
    r.state = std::move(rep.state);
    const double cur = swsr(r.state, eff, cfg);
    r.trace.push_back(cur);
    r.outer_iterations = i;
    if (std::abs(cur - prev) < tol.eps3) {
      r.converged = true;
      break;
    }
    prev = cur;
  }
  fill_rates(r, eff, cfg);
}

void run_fixed(RunResult& r, const ChannelSet& channels, const SystemConfig& cfg, const RunOptions& o,
               bool without_surfaces) {
  const EffectiveChannels eff =
      without_surfaces ? compose_effective_channels(channels, CVec::Zero(idx(cfg.total_elements())))
                       : compose_effective_channels(channels, r.phases);
  Algorithm1Report rep = run_algorithm1(initial_state(eff, cfg), eff, cfg, wmmse_options(o.tol), &r.counters);
  r.wmmse_iterations.push_back(rep.iterations);
  r.outer_iterations = rep.iterations;
  r.converged = rep.converged;
  r.state = std::move(rep.state);
  SolverState start = initial_state(eff, cfg);
  r.trace.push_back(swsr(start, eff, cfg));
  r.trace.insert(r.trace.end(), rep.swsr_trace.begin(), rep.swsr_trace.end());
  fill_rates(r, eff, cfg);
}

void run_matched_filter(RunResult& r, const ChannelSet& channels, const SystemConfig& cfg, const RunOptions& o) {
  const auto& tol = o.tol;
  EffectiveChannels eff = compose_effective_channels(channels, r.phases);
  r.state = matched_filter_state(eff, cfg);
  double prev = swsr(r.state, eff, cfg);
  r.trace.push_back(prev);
  for (int i = 1; i <= tol.max_outer; ++i) {
    try {
      const AscentReport asc = gradient_ascent(channels, r.state, r.phases, cfg, ascent_options(tol), &r.counters);
      r.ascent_iterations.push_back(asc.iterations);
      r.phases = asc.phases;
      eff = compose_effective_channels(channels, r.phases);
      r.state = matched_filter_state(eff, cfg);
    } catch (const SolverError& e) {
      throw SolverError("outer iteration " + std::to_string(i) + ": " + e.what());
    }
    const double cur = swsr(r.state, eff, cfg);
    r.trace.push_back(cur);
    r.outer_iterations = i;
    if (std::abs(cur - prev) < tol.eps3) {
      r.converged = true;
      break;
    }
    prev = cur;
  }
  fill_rates(r, eff, cfg);
}

// Keeps only the DL (keep_dl) or only the UL side of a configuration.
std::pair<ChannelSet, SystemConfig> one_link(const ChannelSet& channels, const SystemConfig& cfg, bool keep_dl) {
  ChannelSet c = channels;
  SystemConfig s = cfg;
  if (keep_dl) {
    s.n_ul = 0;
    s.p_max_ul.clear();
    s.beta_ul.clear();
    c.g_direct.clear();
    c.g_irs_ul.clear();
    c.f_uu = CMat::Zero(idx(cfg.n_dl), 0);
  } else {
    s.n_dl = 0;
    s.beta_dl.clear();
    s.rsi_variance = 0.0;
    c.h_direct.clear();
    c.h_irs_dl.clear();
    c.f_uu = CMat::Zero(0, idx(cfg.n_ul));
  }
  return {std::move(c), std::move(s)};
}

}  // namespace

SchemeKind scheme_from_int(int n) {
  if (n < 1 || n > 4) throw ConfigError("scheme must be 1, 2, 3 or 4, got " + std::to_string(n));
  return static_cast<SchemeKind>(n);
}

std::string to_string(SchemeKind kind) { return std::to_string(static_cast<int>(kind)); }

std::string to_string(Duplex duplex) { return duplex == Duplex::Full ? "FD" : "HD"; }

PhaseVector random_phases(std::size_t m, std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  RVec phi(idx(m));
  for (Eigen::Index n = 0; n < phi.size(); ++n) phi(n) = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return PhaseVector(std::move(phi));
}

RunResult run_algorithm2(const ChannelSet& channels, const SystemConfig& cfg, const Scheme& scheme,
                         const RunOptions& options) {
  if (scheme.duplex == Duplex::Half) return run_half_duplex(channels, cfg, scheme.kind, options);
  cfg.validate();
  channels.validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r;
  r.scheme = scheme;
  r.phases = options.initial_phases.value_or(PhaseVector::zeros(cfg.total_elements()));
  if (r.phases.size() != cfg.total_elements()) {
    throw DimensionError("initial phase vector length does not match the total surface size");
  }
  switch (scheme.kind) {
    case SchemeKind::Joint: run_joint(r, channels, cfg, options); break;
    case SchemeKind::FixedPhases: run_fixed(r, channels, cfg, options, false); break;
    case SchemeKind::NoIrs: run_fixed(r, channels, cfg, options, true); break;
    case SchemeKind::MrtMrc: run_matched_filter(r, channels, cfg, options); break;
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

RunResult run_half_duplex(const ChannelSet& channels, const SystemConfig& cfg, SchemeKind kind,
                          const RunOptions& options) {
  cfg.validate();
  channels.validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const Scheme fd{kind, Duplex::Full};
  RunResult r;
  r.scheme = {kind, Duplex::Half};
  r.dl_rates = RVec::Zero(idx(cfg.n_dl));
  r.ul_rates = RVec::Zero(idx(cfg.n_ul));
  r.phases = options.initial_phases.value_or(PhaseVector::zeros(cfg.total_elements()));
  std::vector<double> dl_trace;
  std::vector<double> ul_trace;
  r.converged = true;

  auto absorb = [&r](const RunResult& part, std::vector<double>& trace) {
    trace = part.trace;
    r.outer_iterations = std::max(r.outer_iterations, part.outer_iterations);
    r.converged = r.converged && part.converged;
    r.counters += part.counters;
    r.wmmse_iterations.insert(r.wmmse_iterations.end(), part.wmmse_iterations.begin(), part.wmmse_iterations.end());
    r.ascent_iterations.insert(r.ascent_iterations.end(), part.ascent_iterations.begin(),
                               part.ascent_iterations.end());
  };

  if (cfg.n_dl > 0) {
    const auto [c, s] = one_link(channels, cfg, true);
    const RunResult part = run_algorithm2(c, s, fd, options);
    absorb(part, dl_trace);
    r.dl_rates = 0.5 * part.dl_rates;
    r.state.w = part.state.w;
    r.state.u1 = part.state.u1;
    r.state.mu_dl = part.state.mu_dl;
  }
  if (cfg.n_ul > 0) {
    const auto [c, s] = one_link(channels, cfg, false);
    const RunResult part = run_algorithm2(c, s, fd, options);
    absorb(part, ul_trace);
    r.ul_rates = 0.5 * part.ul_rates;
    r.state.u = part.state.u;
    r.state.p = part.state.p;
    r.state.mu_ul = part.state.mu_ul;
  }
  r.dl_sum_rate = r.dl_rates.sum();
  r.ul_sum_rate = r.ul_rates.sum();
  r.swsr = 0.0;
  for (std::size_t k = 0; k < cfg.n_dl; ++k) r.swsr += cfg.alpha_dl * cfg.beta_dl[k] * r.dl_rates(idx(k));
  for (std::size_t l = 0; l < cfg.n_ul; ++l) r.swsr += cfg.alpha_ul * cfg.beta_ul[l] * r.ul_rates(idx(l));

  // Slot traces padded with their final values and combined.
  const std::size_t len = std::max(dl_trace.size(), ul_trace.size());
  auto at = [](const std::vector<double>& t, std::size_t i) { return t.empty() ? 0.0 : t[std::min(i, t.size() - 1)]; };
  for (std::size_t i = 0; i < len; ++i) r.trace.push_back(0.5 * (at(dl_trace, i) + at(ul_trace, i)));
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace irsfd
