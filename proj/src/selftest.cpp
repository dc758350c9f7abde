// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include "irsfd/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "irsfd/channelgen.hpp"
#include "irsfd/model.hpp"
#include "irsfd/phaseopt.hpp"
#include "irsfd/wmmse.hpp"

namespace irsfd {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

CVec random_vector(std::size_t n, Rng& rng) {
  CVec v(idx(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
  return v;
}

CMat random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  CMat m(idx(rows), idx(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.complex_normal();
  }
  return m;
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Worst relative error between the analytic phase gradient and central
// differences of the SWSR evaluated from scratch.
double gradient_error(const RandomInstance& inst, bool corrupt) {
  const QuadraticTermCache cache = build_cache(inst.state, inst.channels, inst.cfg);
  RVec analytic = gradient(cache, inst.phases, inst.cfg);
  if (corrupt) analytic = -analytic;
  const double h = 1e-6;
  const auto f = [&](const RVec& phi) {
    return swsr(inst.state, compose_effective_channels(inst.channels, PhaseVector(phi)), inst.cfg);
  };
  RVec numeric(analytic.size());
  for (Eigen::Index n = 0; n < numeric.size(); ++n) {
    RVec plus = inst.phases.angles();
    RVec minus = plus;
    plus(n) += h;
    minus(n) -= h;
    numeric(n) = (f(plus) - f(minus)) / (2.0 * h);
  }
  const double scale = std::max(numeric.cwiseAbs().maxCoeff(), 1e-12);
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

double mmse_identity_error(RandomInstance inst) {
  const EffectiveChannels eff = compose_effective_channels(inst.channels, inst.phases);
  refresh_receivers(inst.state, eff, inst.cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < inst.cfg.n_dl; ++k) {
    worst = std::max(worst, relative(mse_dl(k, inst.state, eff, inst.cfg),
                                     1.0 / (1.0 + dl_sinr(k, inst.state, eff, inst.cfg))));
  }
  for (std::size_t l = 0; l < inst.cfg.n_ul; ++l) {
    worst = std::max(worst, relative(mse_ul(l, inst.state, eff, inst.cfg),
                                     1.0 / (1.0 + ul_sinr(l, inst.state, eff, inst.cfg))));
  }
  return worst;
}

// Relative power-constraint residual of a binding beamformer solve.
double bisection_residual(RandomInstance inst) {
  const EffectiveChannels eff = compose_effective_channels(inst.channels, inst.phases);
  refresh_receivers(inst.state, eff, inst.cfg);
  const auto [mu_dl, mu_ul] = update_weights(inst.state, eff, inst.cfg);
  inst.state.mu_dl = mu_dl;
  inst.state.mu_ul = mu_ul;
  const BeamformerSubproblem sub = build_beamformer_subproblem(inst.state, eff, inst.cfg);
  const double j0 = j_of_lambda(sub, 0.0);
  // Shrink the budget until the constraint binds.
  const double p = std::isfinite(j0) ? std::min(inst.cfg.p_max_bs, 0.5 * j0) : inst.cfg.p_max_bs;
  const BeamformerSolution sol = solve_beamformer(sub, p);
  double power = 0.0;
  for (const auto& w : sol.w) power += w.squaredNorm();
  return std::abs(power - p) / p;
}

struct DistortionErrors {
  double dl = 0.0;
  double ul = 0.0;
  double rsi = 0.0;
};

// Sampled second moments of the signals entering each impaired chain. The
// array-received UL signals enter with their total power and the RSI with its
// per-antenna power, which is the convention of the closed forms.
DistortionErrors distortion_errors(const RandomInstance& inst, std::size_t samples, Rng& rng) {
  const auto& cfg = inst.cfg;
  const auto& st = inst.state;
  const auto& hw = cfg.hw;
  const EffectiveChannels eff = compose_effective_channels(inst.channels, inst.phases);
  const double p_bs = st.bs_power();
  const double tx_sd = std::sqrt(hw.bar_bs_dl() * p_bs);
  const double rsi_sd = std::sqrt(cfg.rsi_variance);

  double dl_acc = 0.0;
  double ul_acc = 0.0;
  double rsi_ant_acc = 0.0;
  double rsi_comb_acc = 0.0;
  const CVec& u0 = st.u.at(0);
  for (std::size_t s = 0; s < samples; ++s) {
    CVec x_dl = CVec::Zero(idx(cfg.n_tx));
    for (std::size_t k = 0; k < cfg.n_dl; ++k) x_dl += std::sqrt(hw.xi_bs_dl) * st.w[k] * rng.complex_normal();
    x_dl += tx_sd * random_vector(cfg.n_tx, rng);
    CVec x_ul(idx(cfg.n_ul));
    for (std::size_t l = 0; l < cfg.n_ul; ++l) {
      x_ul(idx(l)) = std::sqrt(hw.xi_ue_ul * st.rho(l)) * rng.complex_normal() +
                     std::sqrt(hw.bar_ue_ul() * st.rho(l)) * rng.complex_normal();
    }
    cplx dl_in = eff.h_bar[0].dot(x_dl);
    for (std::size_t l = 0; l < cfg.n_ul; ++l) dl_in += eff.f_bar(0, idx(l)) * x_ul(idx(l));
    dl_acc += std::norm(dl_in);

    CVec ul_in = CVec::Zero(idx(cfg.n_tx));
    for (std::size_t l = 0; l < cfg.n_ul; ++l) ul_in += eff.g_bar[l] * x_ul(idx(l));
    ul_acc += ul_in.squaredNorm();
    const CMat h_si = rsi_sd * random_matrix(cfg.n_tx, cfg.n_tx, rng);
    const CVec si = h_si * x_dl;
    rsi_ant_acc += std::norm(si(0));
    rsi_comb_acc += std::norm(u0.dot(si));
  }
  const double n = static_cast<double>(samples);
  DistortionErrors e;
  e.dl = relative(hw.bar_ue_dl() * dl_acc / n, dl_distortion_variance(0, st, eff, cfg));
  e.ul = relative(hw.bar_bs_ul() * (ul_acc + rsi_ant_acc) / n, ul_distortion_variance(st, eff, cfg));
  e.rsi = relative(rsi_comb_acc / n, rsi_power(u0, st, cfg));
  return e;
}

}  // namespace

RandomInstance random_instance(const InstanceShape& shape, std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  RandomInstance inst;
  auto& cfg = inst.cfg;
  cfg.n_tx = shape.n_tx;
  cfg.n_dl = shape.n_dl;
  cfg.n_ul = shape.n_ul;
  cfg.irs_sizes = shape.irs_sizes;
  cfg.p_max_bs = 10.0;
  cfg.set_uniform_ul_power(2.0);
  cfg.noise_dl = 1.0;
  cfg.noise_ul = 1.0;
  cfg.rsi_variance = 0.1;
  cfg.hw = HardwareQuality::uniform(shape.xi);
  cfg.alpha_dl = rng.uniform(0.5, 1.5);
  cfg.alpha_ul = rng.uniform(0.5, 1.5);
  cfg.beta_dl.clear();
  cfg.beta_ul.clear();
  for (std::size_t k = 0; k < cfg.n_dl; ++k) cfg.beta_dl.push_back(rng.uniform(0.5, 1.5));
  for (std::size_t l = 0; l < cfg.n_ul; ++l) cfg.beta_ul.push_back(rng.uniform(0.5, 1.5));
  cfg.validate();

  auto& ch = inst.channels;
  // Cascaded links are scaled so direct and reflected paths are comparable.
  const double m_scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(cfg.total_elements(), 1)));
  for (std::size_t k = 0; k < cfg.n_dl; ++k) ch.h_direct.push_back(random_vector(cfg.n_tx, rng));
  for (std::size_t l = 0; l < cfg.n_ul; ++l) ch.g_direct.push_back(random_vector(cfg.n_tx, rng));
  ch.f_uu = 0.3 * random_matrix(cfg.n_dl, cfg.n_ul, rng);
  for (std::size_t m : cfg.irs_sizes) ch.h_bs_irs.push_back(m_scale * random_matrix(m, cfg.n_tx, rng));
  ch.h_irs_dl.resize(cfg.n_dl);
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    for (std::size_t m : cfg.irs_sizes) ch.h_irs_dl[k].push_back(random_vector(m, rng));
  }
  ch.g_irs_ul.resize(cfg.n_ul);
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    for (std::size_t m : cfg.irs_sizes) ch.g_irs_ul[l].push_back(random_vector(m, rng));
  }
  ch.validate(cfg);

  auto& st = inst.state;
  st = SolverState::zeros(cfg);
  double w_power = 0.0;
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    st.w[k] = random_vector(cfg.n_tx, rng);
    w_power += st.w[k].squaredNorm();
  }
  if (w_power > 0.0) {
    for (auto& w : st.w) w *= std::sqrt(cfg.p_max_bs / w_power);
  }
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    st.u[l] = random_vector(cfg.n_tx, rng);
    st.p(idx(l)) = std::sqrt(cfg.p_max_ul[l]) * rng.uniform(0.3, 1.0);
  }
  for (std::size_t k = 0; k < cfg.n_dl; ++k) st.u1(idx(k)) = rng.complex_normal();

  RVec phi(idx(cfg.total_elements()));
  for (Eigen::Index n = 0; n < phi.size(); ++n) phi(n) = rng.uniform(0.0, 2.0 * std::numbers::pi);
  inst.phases = PhaseVector(std::move(phi));
  return inst;
}

bool SelftestReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const SelftestCheck& c) { return c.passed; });
}

SelftestReport run_selftest(const SelftestOptions& options) {
  const std::size_t sizes[] = {2, 4, 8};
  double grad = 0.0;
  double mmse = 0.0;
  double bisect = 0.0;
  for (int i = 0; i < options.instances; ++i) {
    InstanceShape shape;
    const std::size_t m = sizes[static_cast<std::size_t>(i) % 3];
    shape.irs_sizes = {m / 2, m - m / 2};
    shape.xi = i % 2 == 0 ? 1.0 : 0.92;
    const RandomInstance inst = random_instance(shape, options.seed, static_cast<std::uint64_t>(i));
    grad = std::max(grad, gradient_error(inst, options.corrupt_gradient));
    mmse = std::max(mmse, mmse_identity_error(inst));
    bisect = std::max(bisect, bisection_residual(inst));
  }

  InstanceShape impaired;
  impaired.xi = 0.92;
  Rng mc_rng(options.seed, 1000);
  const DistortionErrors hi =
      distortion_errors(random_instance(impaired, options.seed, 1001), options.mc_samples, mc_rng);
  const DistortionErrors ideal =
      distortion_errors(random_instance(InstanceShape{}, options.seed, 1002), options.mc_samples, mc_rng);

  SelftestReport r;
  r.checks.push_back({"phase gradient vs finite differences", grad < 1e-5, grad, 1e-5});
  r.checks.push_back({"MMSE equals 1/(1+SINR)", mmse < 1e-8, mmse, 1e-8});
  r.checks.push_back({"binding power constraint residual", bisect < 1e-6, bisect, 1e-6});
  r.checks.push_back({"DL distortion variance (Monte-Carlo)", hi.dl < 0.03, hi.dl, 0.03});
  r.checks.push_back({"BS receiver distortion variance (Monte-Carlo)", hi.ul < 0.03, hi.ul, 0.03});
  r.checks.push_back({"self-interference power (Monte-Carlo)", ideal.rsi < 0.03, ideal.rsi, 0.03});
  return r;
}

std::string format_report(const SelftestReport& report) {
  std::string out;
  char line[256];
  for (const auto& c : report.checks) {
    std::snprintf(line, sizeof line, "%-4s  %-46s  error %.3e  (limit %.1e)\n", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), c.metric, c.threshold);
    out += line;
  }
  return out;
}

}  // namespace irsfd
