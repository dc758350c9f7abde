// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include "irsfd/model.hpp"

#include <cmath>
#include <string>

#include "irsfd/error.hpp"

namespace irsfd {

namespace {

constexpr double kMinDenominator = 1e-300;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

EffectiveChannels compose_effective_channels(const ChannelSet& channels, const CVec& reflection) {
  const CMat h_hat = channels.stacked_bs_irs();
  if (reflection.size() != h_hat.rows()) {
    throw DimensionError("reflection vector length " + std::to_string(reflection.size()) +
                         " does not match stacked surface size " + std::to_string(h_hat.rows()));
  }
  EffectiveChannels eff;
  const auto n_dl = channels.h_direct.size();
  const auto n_ul = channels.g_direct.size();
  std::vector<CVec> dl_stacked(n_dl);
  std::vector<CVec> ul_stacked(n_ul);

  eff.h_bar.resize(n_dl);
  for (std::size_t k = 0; k < n_dl; ++k) {
    dl_stacked[k] = channels.stacked_dl(k);
    if (dl_stacked[k].size() != h_hat.rows()) throw DimensionError("channel block h_irs_dl[" + std::to_string(k) + "] stacked length mismatch");
    if (channels.h_direct[k].size() != h_hat.cols()) throw DimensionError("channel block h_direct[" + std::to_string(k) + "] length mismatch");
    // h_bar_k = h_k + H_hat^H conj(Theta) h_hat_k
    const CVec reflected = reflection.conjugate().cwiseProduct(dl_stacked[k]);
    eff.h_bar[k] = channels.h_direct[k] + h_hat.adjoint() * reflected;
  }
  eff.g_bar.resize(n_ul);
  for (std::size_t l = 0; l < n_ul; ++l) {
    ul_stacked[l] = channels.stacked_ul(l);
    if (ul_stacked[l].size() != h_hat.rows()) throw DimensionError("channel block g_irs_ul[" + std::to_string(l) + "] stacked length mismatch");
    if (channels.g_direct[l].size() != h_hat.cols()) throw DimensionError("channel block g_direct[" + std::to_string(l) + "] length mismatch");
    const CVec reflected = reflection.cwiseProduct(ul_stacked[l]);
    eff.g_bar[l] = channels.g_direct[l] + h_hat.adjoint() * reflected;
  }
  if (channels.f_uu.rows() != idx(n_dl) || channels.f_uu.cols() != idx(n_ul)) {
    throw DimensionError("channel block f_uu[0]: must be n_dl x n_ul");
  }
  eff.f_bar = channels.f_uu;
  for (std::size_t k = 0; k < n_dl; ++k) {
    for (std::size_t l = 0; l < n_ul; ++l) {
      // h_hat_k^H Theta g_hat_l
      eff.f_bar(idx(k), idx(l)) += dl_stacked[k].dot(reflection.cwiseProduct(ul_stacked[l]));
    }
  }
  return eff;
}

EffectiveChannels compose_effective_channels(const ChannelSet& channels, const PhaseVector& phases) {
  return compose_effective_channels(channels, phases.reflection());
}

double dl_distortion_variance(std::size_t k, const SolverState& state, const EffectiveChannels& eff,
                              const SystemConfig& cfg) {
  const auto& hw = cfg.hw;
  const CVec& h = eff.h_bar.at(k);
  double beam = 0.0;
  for (const auto& wi : state.w) beam += std::norm(h.dot(wi));
  double ul = 0.0;
  for (std::size_t l = 0; l < cfg.n_ul; ++l) ul += std::norm(eff.f_bar(idx(k), idx(l))) * state.rho(l);
  return hw.bar_ue_dl() * (hw.xi_bs_dl * beam + hw.bar_bs_dl() * h.squaredNorm() * state.bs_power() + ul);
}

double ul_distortion_variance(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  const auto& hw = cfg.hw;
  double ul = 0.0;
  for (std::size_t j = 0; j < cfg.n_ul; ++j) ul += eff.g_bar[j].squaredNorm() * state.rho(j);
  const double rsi = cfg.rsi_variance * state.bs_power() *
                     (hw.xi_bs_dl + hw.bar_bs_dl() * static_cast<double>(cfg.n_tx));
  return hw.bar_bs_ul() * (ul + rsi);
}

double rsi_power(const CVec& u_l, const SolverState& state, const SystemConfig& cfg) {
  return cfg.rsi_variance * u_l.squaredNorm() * state.bs_power() * cfg.hw.rsi_bracket(cfg.n_tx);
}

DlSinrTerms dl_sinr_terms(std::size_t k, const SolverState& state, const EffectiveChannels& eff,
                          const SystemConfig& cfg) {
  const auto& hw = cfg.hw;
  const CVec& h = eff.h_bar.at(k);
  DlSinrTerms t;
  const double own = std::norm(h.dot(state.w.at(k)));
  t.signal = hw.xi_ue_dl * hw.xi_bs_dl * own;
  for (std::size_t i = 0; i < state.w.size(); ++i) {
    if (i != k) t.multiuser += std::norm(h.dot(state.w[i]));
  }
  t.multiuser *= hw.xi_bs_dl;
  t.self_distortion = hw.bar_ue_dl() * hw.xi_bs_dl * own;
  t.tx_distortion = hw.bar_bs_dl() * h.squaredNorm() * state.bs_power();
  for (std::size_t l = 0; l < cfg.n_ul; ++l) t.ul_interference += std::norm(eff.f_bar(idx(k), idx(l))) * state.rho(l);
  t.noise = cfg.noise_dl;
  return t;
}

UlSinrTerms ul_sinr_terms(std::size_t l, const SolverState& state, const EffectiveChannels& eff,
                          const SystemConfig& cfg) {
  const auto& hw = cfg.hw;
  const CVec& u = state.u.at(l);
  UlSinrTerms t;
  const double own = std::norm(u.dot(eff.g_bar.at(l))) * state.rho(l);
  t.signal = hw.xi_ue_ul * hw.xi_bs_ul * own;
  double ul_power = 0.0;
  for (std::size_t j = 0; j < cfg.n_ul; ++j) {
    if (j != l) t.multiuser += std::norm(u.dot(eff.g_bar[j])) * state.rho(j);
    ul_power += eff.g_bar[j].squaredNorm() * state.rho(j);
  }
  t.multiuser *= hw.xi_bs_ul;
  t.self_distortion = hw.bar_ue_ul() * hw.xi_bs_ul * own;
  t.rx_distortion = u.squaredNorm() * hw.bar_bs_ul() * ul_power;
  t.rsi = rsi_power(u, state, cfg);
  t.noise = cfg.noise_ul * u.squaredNorm();
  return t;
}

double dl_sinr(std::size_t k, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  const auto t = dl_sinr_terms(k, state, eff, cfg);
  const double den = t.denominator();
  if (!(den >= kMinDenominator)) {
    throw SolverError("DL SINR denominator of user " + std::to_string(k) + " is not positive");
  }
  return t.signal / den;
}

double ul_sinr(std::size_t l, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  const auto t = ul_sinr_terms(l, state, eff, cfg);
  if (t.signal == 0.0) return 0.0;
  const double den = t.denominator();
  if (!(den >= kMinDenominator)) {
    throw SolverError("UL SINR denominator of user " + std::to_string(l) + " is not positive");
  }
  return t.signal / den;
}

RateSummary evaluate_rates(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  RateSummary r;
  r.dl = RVec::Zero(idx(cfg.n_dl));
  r.ul = RVec::Zero(idx(cfg.n_ul));
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    r.dl(idx(k)) = std::log2(1.0 + dl_sinr(k, state, eff, cfg));
    r.dl_sum += r.dl(idx(k));
    r.swsr += cfg.alpha_dl * cfg.beta_dl[k] * r.dl(idx(k));
  }
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    r.ul(idx(l)) = std::log2(1.0 + ul_sinr(l, state, eff, cfg));
    r.ul_sum += r.ul(idx(l));
    r.swsr += cfg.alpha_ul * cfg.beta_ul[l] * r.ul(idx(l));
  }
  return r;
}

double swsr(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg) {
  return evaluate_rates(state, eff, cfg).swsr;
}

}  // namespace irsfd
