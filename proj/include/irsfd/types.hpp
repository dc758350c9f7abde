// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace irsfd {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// dBm -> linear watts.
double dbm_to_watts(double dbm);
/// linear watts -> dBm.
double watts_to_dbm(double watts);
/// dB -> linear power ratio.
double db_to_linear(double db);

/// Hardware quality factors of the four transceiver chains. A factor of one
/// is ideal hardware; the complement 1 - xi scales the additive distortion.
struct HardwareQuality {
  double xi_ue_dl = 1.0;
  double xi_ue_ul = 1.0;
  double xi_bs_dl = 1.0;
  double xi_bs_ul = 1.0;

  double bar_ue_dl() const { return 1.0 - xi_ue_dl; }
  double bar_ue_ul() const { return 1.0 - xi_ue_ul; }
  double bar_bs_dl() const { return 1.0 - xi_bs_dl; }
  double bar_bs_ul() const { return 1.0 - xi_bs_ul; }

  /// Bracket shared by the RSI power and everything derived from it:
  /// xi_bs_ul + xi_bs_dl - xi_bs_ul xi_bs_dl + (1-xi_bs_ul)(1-xi_bs_dl) N_t.
  double rsi_bracket(std::size_t n_tx) const;

  static HardwareQuality ideal() { return {}; }
  static HardwareQuality uniform(double xi) { return {xi, xi, xi, xi}; }

  void validate() const;
};

/// Scalar system parameters. All powers are linear watts.
struct SystemConfig {
  std::size_t n_tx = 1;
  std::size_t n_dl = 1;
  std::size_t n_ul = 1;
  std::vector<std::size_t> irs_sizes{1};
  double p_max_bs = 1.0;
  std::vector<double> p_max_ul{1.0};
  double noise_dl = 1.0;
  double noise_ul = 1.0;
  double rsi_variance = 0.0;
  HardwareQuality hw;
  double alpha_dl = 1.0;
  double alpha_ul = 1.0;
  std::vector<double> beta_dl{1.0};
  std::vector<double> beta_ul{1.0};

  std::size_t n_irs() const { return irs_sizes.size(); }
  /// M, the total number of reflecting elements over all surfaces.
  std::size_t total_elements() const;

  /// Resizes the per-user lists to the current counts, filling with `value`.
  void set_uniform_ul_power(double watts);
  void set_uniform_weights(double beta = 1.0);

  void validate() const;
};

/// Raw channel realizations. Naming follows the link, not the symbol:
/// DL users are indexed by k, UL users by l, surfaces by r.
struct ChannelSet {
  std::vector<CVec> h_direct;              // [k] BS -> DL user, length N_t
  std::vector<CVec> g_direct;              // [l] UL user -> BS, length N_t
  CMat f_uu;                               // (k, l) UL user l -> DL user k
  std::vector<CMat> h_bs_irs;              // [r] BS -> surface r, M_r x N_t
  std::vector<std::vector<CVec>> h_irs_dl; // [k][r] surface r -> DL user k
  std::vector<std::vector<CVec>> g_irs_ul; // [l][r] UL user l -> surface r

  /// Vertical stack of the BS -> surface blocks (M x N_t).
  CMat stacked_bs_irs() const;
  /// Stack of the surface -> DL user k blocks (length M).
  CVec stacked_dl(std::size_t k) const;
  /// Stack of the UL user l -> surface blocks (length M).
  CVec stacked_ul(std::size_t l) const;

  /// Throws DimensionError naming the first block whose shape disagrees.
  void validate(const SystemConfig& cfg) const;

  /// Zero-filled set with the shapes implied by `cfg`.
  static ChannelSet zeros(const SystemConfig& cfg);
  /// Same shapes with every surface block zeroed.
  ChannelSet without_irs() const;
};

/// Stacked surface phases and the matching unit-modulus reflection vector.
class PhaseVector {
 public:
  PhaseVector() = default;
  explicit PhaseVector(RVec angles);

  static PhaseVector zeros(std::size_t m);

  const RVec& angles() const { return phi_; }
  const CVec& reflection() const { return v_; }
  std::size_t size() const { return static_cast<std::size_t>(phi_.size()); }

  /// New vector with angles phi + step * direction, wrapped into [0, 2pi).
  PhaseVector advanced(double step, const RVec& direction) const;

 private:
  RVec phi_;
  CVec v_;
};

/// Wraps an angle into [0, 2pi).
double wrap_angle(double phi);

/// Direct channels plus every reflected path composed through the phases.
struct EffectiveChannels {
  std::vector<CVec> h_bar;  // [k]
  std::vector<CVec> g_bar;  // [l]
  CMat f_bar;               // (k, l)
};

/// Transceiver variables of the weighted-MMSE problem. Uplink power is kept
/// as the amplitude p_l, so rho_l = p_l^2.
struct SolverState {
  std::vector<CVec> w;  // [k] DL beamformers
  std::vector<CVec> u;  // [l] UL combiners
  CVec u1;              // [k] DL decoding scalars
  RVec p;               // [l] UL amplitudes
  RVec mu_dl;           // [k]
  RVec mu_ul;           // [l]

  double rho(std::size_t l) const { return p(static_cast<Eigen::Index>(l)) * p(static_cast<Eigen::Index>(l)); }
  /// Sum of |w_k|^2.
  double bs_power() const;

  /// Zero beamformers and combiners, unit weights, zero powers.
  static SolverState zeros(const SystemConfig& cfg);
};

}  // namespace irsfd
