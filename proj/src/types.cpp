// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include "irsfd/types.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "irsfd/error.hpp"

namespace irsfd {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double HardwareQuality::rsi_bracket(std::size_t n_tx) const {
  return xi_bs_ul + xi_bs_dl - xi_bs_ul * xi_bs_dl +
         bar_bs_ul() * bar_bs_dl() * static_cast<double>(n_tx);
}

void HardwareQuality::validate() const {
  const double all[] = {xi_ue_dl, xi_ue_ul, xi_bs_dl, xi_bs_ul};
  for (double xi : all) {
    if (!(xi >= 0.0 && xi <= 1.0)) {
      throw ConfigError("hardware quality factor outside [0, 1]: " + std::to_string(xi));
    }
  }
}

std::size_t SystemConfig::total_elements() const {
  std::size_t m = 0;
  for (auto s : irs_sizes) m += s;
  return m;
}

void SystemConfig::set_uniform_ul_power(double watts) { p_max_ul.assign(n_ul, watts); }

void SystemConfig::set_uniform_weights(double beta) {
  beta_dl.assign(n_dl, beta);
  beta_ul.assign(n_ul, beta);
}

namespace {

void require_finite_nonneg(double x, const char* name) {
  if (!std::isfinite(x) || x < 0.0) {
    throw ConfigError(std::string(name) + " must be finite and nonnegative");
  }
}

void require_finite_pos(double x, const char* name) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw ConfigError(std::string(name) + " must be finite and positive");
  }
}

}  // namespace

void SystemConfig::validate() const {
  if (n_tx == 0) throw ConfigError("n_tx must be positive");
  if (n_dl + n_ul == 0) throw ConfigError("at least one DL or UL user is required");
  if (irs_sizes.empty()) throw ConfigError("irs_sizes must be nonempty");
  for (auto s : irs_sizes) {
    if (s == 0) throw ConfigError("every surface needs at least one element");
  }
  require_finite_nonneg(p_max_bs, "p_max_bs");
  if (p_max_ul.size() != n_ul) throw ConfigError("p_max_ul length must equal n_ul");
  for (double p : p_max_ul) require_finite_nonneg(p, "p_max_ul");
  require_finite_pos(noise_dl, "noise_dl");
  require_finite_pos(noise_ul, "noise_ul");
  require_finite_nonneg(rsi_variance, "rsi_variance");
  hw.validate();
  require_finite_nonneg(alpha_dl, "alpha_dl");
  require_finite_nonneg(alpha_ul, "alpha_ul");
  if (beta_dl.size() != n_dl) throw ConfigError("beta_dl length must equal n_dl");
  if (beta_ul.size() != n_ul) throw ConfigError("beta_ul length must equal n_ul");
  for (double b : beta_dl) require_finite_nonneg(b, "beta_dl");
  for (double b : beta_ul) require_finite_nonneg(b, "beta_ul");
}

CMat ChannelSet::stacked_bs_irs() const {
  Eigen::Index rows = 0;
  Eigen::Index cols = h_bs_irs.empty() ? 0 : h_bs_irs.front().cols();
  for (const auto& b : h_bs_irs) rows += b.rows();
  CMat out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : h_bs_irs) {
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

namespace {

CVec stack(const std::vector<CVec>& blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.size();
  CVec out(n);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.segment(at, b.size()) = b;
    at += b.size();
  }
  return out;
}

[[noreturn]] void shape_error(const std::string& block, std::size_t index, const std::string& detail) {
  throw DimensionError("channel block " + block + "[" + std::to_string(index) + "]: " + detail);
}

}  // namespace

CVec ChannelSet::stacked_dl(std::size_t k) const { return stack(h_irs_dl.at(k)); }

CVec ChannelSet::stacked_ul(std::size_t l) const { return stack(g_irs_ul.at(l)); }

void ChannelSet::validate(const SystemConfig& cfg) const {
  const auto nt = static_cast<Eigen::Index>(cfg.n_tx);
  if (h_direct.size() != cfg.n_dl) shape_error("h_direct", 0, "expected " + std::to_string(cfg.n_dl) + " users");
  if (g_direct.size() != cfg.n_ul) shape_error("g_direct", 0, "expected " + std::to_string(cfg.n_ul) + " users");
  for (std::size_t k = 0; k < h_direct.size(); ++k) {
    if (h_direct[k].size() != nt) shape_error("h_direct", k, "length must equal n_tx");
    if (!h_direct[k].allFinite()) shape_error("h_direct", k, "non-finite entry");
  }
  for (std::size_t l = 0; l < g_direct.size(); ++l) {
    if (g_direct[l].size() != nt) shape_error("g_direct", l, "length must equal n_tx");
    if (!g_direct[l].allFinite()) shape_error("g_direct", l, "non-finite entry");
  }
  if (f_uu.rows() != static_cast<Eigen::Index>(cfg.n_dl) || f_uu.cols() != static_cast<Eigen::Index>(cfg.n_ul)) {
    shape_error("f_uu", 0, "must be n_dl x n_ul");
  }
  if (!f_uu.allFinite()) shape_error("f_uu", 0, "non-finite entry");
  if (h_bs_irs.size() != cfg.n_irs()) shape_error("h_bs_irs", 0, "expected one block per surface");
  for (std::size_t r = 0; r < h_bs_irs.size(); ++r) {
    if (h_bs_irs[r].rows() != static_cast<Eigen::Index>(cfg.irs_sizes[r]) || h_bs_irs[r].cols() != nt) {
      shape_error("h_bs_irs", r, "must be M_r x n_tx");
    }
    if (!h_bs_irs[r].allFinite()) shape_error("h_bs_irs", r, "non-finite entry");
  }
  auto check_user_blocks = [&](const std::vector<std::vector<CVec>>& blocks, std::size_t n, const char* name) {
    if (blocks.size() != n) shape_error(name, 0, "expected " + std::to_string(n) + " users");
    for (std::size_t i = 0; i < n; ++i) {
      if (blocks[i].size() != cfg.n_irs()) shape_error(name, i, "expected one block per surface");
      for (std::size_t r = 0; r < blocks[i].size(); ++r) {
        if (blocks[i][r].size() != static_cast<Eigen::Index>(cfg.irs_sizes[r])) {
          shape_error(name, i, "surface " + std::to_string(r) + " block length must equal M_r");
        }
        if (!blocks[i][r].allFinite()) shape_error(name, i, "non-finite entry");
      }
    }
  };
  check_user_blocks(h_irs_dl, cfg.n_dl, "h_irs_dl");
  check_user_blocks(g_irs_ul, cfg.n_ul, "g_irs_ul");
}

ChannelSet ChannelSet::zeros(const SystemConfig& cfg) {
  const auto nt = static_cast<Eigen::Index>(cfg.n_tx);
  ChannelSet c;
  c.h_direct.assign(cfg.n_dl, CVec::Zero(nt));
  c.g_direct.assign(cfg.n_ul, CVec::Zero(nt));
  c.f_uu = CMat::Zero(static_cast<Eigen::Index>(cfg.n_dl), static_cast<Eigen::Index>(cfg.n_ul));
  std::vector<CVec> per_surface;
  for (auto m : cfg.irs_sizes) {
    c.h_bs_irs.push_back(CMat::Zero(static_cast<Eigen::Index>(m), nt));
    per_surface.push_back(CVec::Zero(static_cast<Eigen::Index>(m)));
  }
  c.h_irs_dl.assign(cfg.n_dl, per_surface);
  c.g_irs_ul.assign(cfg.n_ul, per_surface);
  return c;
}

ChannelSet ChannelSet::without_irs() const {
  ChannelSet c = *this;
  for (auto& b : c.h_bs_irs) b.setZero();
  for (auto& user : c.h_irs_dl)
    for (auto& b : user) b.setZero();
  for (auto& user : c.g_irs_ul)
    for (auto& b : user) b.setZero();
  return c;
}

double wrap_angle(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(phi, two_pi);
  if (r < 0.0) r += two_pi;
  // fmod of a value just below a multiple of 2pi can round up to 2pi.
  if (r >= two_pi) r = 0.0;
  return r;
}

PhaseVector::PhaseVector(RVec angles) : phi_(std::move(angles)), v_(phi_.size()) {
  for (Eigen::Index n = 0; n < phi_.size(); ++n) {
    phi_(n) = wrap_angle(phi_(n));
    v_(n) = std::polar(1.0, phi_(n));
  }
}

PhaseVector PhaseVector::zeros(std::size_t m) { return PhaseVector(RVec::Zero(static_cast<Eigen::Index>(m))); }

PhaseVector PhaseVector::advanced(double step, const RVec& direction) const {
  return PhaseVector(RVec(phi_ + step * direction));
}

double SolverState::bs_power() const {
  double s = 0.0;
  for (const auto& wk : w) s += wk.squaredNorm();
  return s;
}

SolverState SolverState::zeros(const SystemConfig& cfg) {
  const auto nt = static_cast<Eigen::Index>(cfg.n_tx);
  const auto k = static_cast<Eigen::Index>(cfg.n_dl);
  const auto l = static_cast<Eigen::Index>(cfg.n_ul);
  SolverState s;
  s.w.assign(cfg.n_dl, CVec::Zero(nt));
  s.u.assign(cfg.n_ul, CVec::Zero(nt));
  s.u1 = CVec::Zero(k);
  s.p = RVec::Zero(l);
  s.mu_dl = RVec::Ones(k);
  s.mu_ul = RVec::Ones(l);
  return s;
}

}  // namespace irsfd
