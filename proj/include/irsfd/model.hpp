// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>

#include "irsfd/types.hpp"

namespace irsfd {

/// Composes the effective channels through the stacked diagonal phase matrix:
///   h_bar_k^H = h_k^H + h_hat_k^H Theta H_hat,
///   g_bar_l   = g_l + H_hat^H Theta g_hat_l,
///   f_bar_lk  = f_lk + h_hat_k^H Theta g_hat_l.
EffectiveChannels compose_effective_channels(const ChannelSet& channels, const PhaseVector& phases);

/// Same composition with an arbitrary reflection vector (not necessarily
/// unit modulus). A zero vector yields the direct channels only.
EffectiveChannels compose_effective_channels(const ChannelSet& channels, const CVec& reflection);

/// Hardware distortion variance at DL user k.
double dl_distortion_variance(std::size_t k, const SolverState& state, const EffectiveChannels& eff,
                              const SystemConfig& cfg);

/// Per-antenna hardware distortion variance of the BS receiver.
double ul_distortion_variance(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

/// Average residual self-interference power seen through combiner `u_l`.
double rsi_power(const CVec& u_l, const SolverState& state, const SystemConfig& cfg);

/// The five additive pieces of a DL SINR denominator, kept apart so callers
/// can inspect or reduce them.
struct DlSinrTerms {
  double signal = 0.0;
  double multiuser = 0.0;
  double self_distortion = 0.0;
  double tx_distortion = 0.0;
  double ul_interference = 0.0;
  double noise = 0.0;
  double denominator() const { return multiuser + self_distortion + tx_distortion + ul_interference + noise; }
};

struct UlSinrTerms {
  double signal = 0.0;
  double multiuser = 0.0;
  double self_distortion = 0.0;
  double rx_distortion = 0.0;
  double rsi = 0.0;
  double noise = 0.0;
  double denominator() const { return multiuser + self_distortion + rx_distortion + rsi + noise; }
};

DlSinrTerms dl_sinr_terms(std::size_t k, const SolverState& state, const EffectiveChannels& eff,
                          const SystemConfig& cfg);
UlSinrTerms ul_sinr_terms(std::size_t l, const SolverState& state, const EffectiveChannels& eff,
                          const SystemConfig& cfg);

/// SINR of DL user k. Throws SolverError if the denominator is below 1e-300.
double dl_sinr(std::size_t k, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

/// SINR of UL user l after combining with state.u[l].
double ul_sinr(std::size_t l, const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

/// Per-user rates in bits per channel use, and their weighted total.
struct RateSummary {
  RVec dl;
  RVec ul;
  double dl_sum = 0.0;
  double ul_sum = 0.0;
  double swsr = 0.0;
};

RateSummary evaluate_rates(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

/// alpha_dl sum_k beta_k log2(1+gamma_k) + alpha_ul sum_l beta_l log2(1+gamma_l).
double swsr(const SolverState& state, const EffectiveChannels& eff, const SystemConfig& cfg);

}  // namespace irsfd
