// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------
//
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails. Usage: acceptance [name...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "irsfd/channelgen.hpp"
#include "irsfd/config_io.hpp"
#include "irsfd/harness.hpp"
#include "irsfd/model.hpp"
#include "irsfd/orchestrator.hpp"
#include "irsfd/phaseopt.hpp"
#include "irsfd/selftest.hpp"
#include "irsfd/wmmse.hpp"
#include "support/oracles.hpp"

namespace {

using namespace irsfd;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

// ---------------------------------------------------------------- gradient

Outcome gradient_check() {
  const std::size_t sizes[] = {2, 4, 8};
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    InstanceShape shape;
    const std::size_t m = sizes[i % 3];
    shape.irs_sizes = {m / 2, m / 2};
    shape.xi = i % 2 == 0 ? 1.0 : 0.92;
    const auto inst = random_instance(shape, 1000 + static_cast<std::uint64_t>(i), 0);
    const auto cache = build_cache(inst.state, inst.channels, inst.cfg);
    const RVec g = gradient(cache, inst.phases, inst.cfg);
    const RVec fd = oracle::central_difference(
        [&](const RVec& x) { return oracle::swsr(inst.state, inst.channels, x, inst.cfg); }, inst.phases.angles(),
        1e-6);
    worst = std::max(worst, (g - fd).norm() / fd.norm());
  }
  return {worst < 1e-5, "max relative error " + fmt("%.2e", worst) + " over 20 instances (limit 1e-5)"};
}

// ---------------------------------------------------------------- MMSE identity

Outcome mmse_identity() {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    InstanceShape shape;
    shape.xi = i % 2 == 0 ? 1.0 : 0.92;
    auto inst = random_instance(shape, 2000 + static_cast<std::uint64_t>(i), 0);
    const auto eff = compose_effective_channels(inst.channels, inst.phases);
    const auto ref = oracle::effective(inst.channels, inst.phases.angles());
    auto& s = inst.state;
    for (std::size_t k = 0; k < inst.cfg.n_dl; ++k) s.u1(ix(k)) = update_u1k(k, s, eff, inst.cfg);
    for (std::size_t l = 0; l < inst.cfg.n_ul; ++l) s.u[l] = update_ul(l, s, eff, inst.cfg);
    for (std::size_t k = 0; k < inst.cfg.n_dl; ++k) {
      const double e = oracle::dl_mse(k, s.u1(ix(k)), s, ref, inst.cfg);
      const double expect = 1.0 / (1.0 + oracle::dl_sinr(k, s, ref, inst.cfg));
      worst = std::max(worst, std::abs(e - expect) / expect);
    }
    for (std::size_t l = 0; l < inst.cfg.n_ul; ++l) {
      const double e = oracle::ul_mse(l, s.u[l], s, ref, inst.cfg);
      const double expect = 1.0 / (1.0 + oracle::ul_sinr(l, s, ref, inst.cfg));
      worst = std::max(worst, std::abs(e - expect) / expect);
    }
  }
  return {worst < 1e-8, "max relative error " + fmt("%.2e", worst) + " over 50 instances (limit 1e-8)"};
}

// ---------------------------------------------------------------- distortion Monte-Carlo

struct Sampler {
  Rng rng;
  cplx cn(double var) { return std::sqrt(var) * rng.complex_normal(); }
  CVec cn_vec(Eigen::Index n, double var) {
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cn(var);
    return v;
  }
};

// Transmitted BS vector: sqrt(xi) sum_k w_k s_k plus distortion with
// covariance (1 - xi) (sum_k |w_k|^2) I.
CVec bs_transmit(const SolverState& st, double xi, Sampler& smp) {
  const Eigen::Index n = st.w.front().size();
  CVec x = CVec::Zero(n);
  for (const auto& w : st.w) x += std::sqrt(xi) * w * smp.cn(1.0);
  return x + smp.cn_vec(n, (1.0 - xi) * st.bs_power());
}

struct McResult {
  double dl = 0.0;   // relative error of the DL receive distortion variance
  double ul = 0.0;   // relative error of the BS receive distortion variance
  double rsi = 0.0;  // relative error of the residual self-interference power
};

McResult distortion_mc(double xi, std::size_t samples, std::uint64_t seed) {
  InstanceShape shape;
  shape.xi = xi;
  const auto inst = random_instance(shape, seed, 0);
  const auto& cfg = inst.cfg;
  const auto& hw = cfg.hw;
  const auto& st = inst.state;
  const auto eff = compose_effective_channels(inst.channels, inst.phases);
  const auto n = ix(cfg.n_tx);
  Sampler smp{Rng(seed, 99)};

  double dl_acc = 0.0;
  double ul_signal_acc = 0.0;
  double rsi_antenna_acc = 0.0;
  double rsi_combined_acc = 0.0;
  const CVec& u0 = st.u[0];
  for (std::size_t t = 0; t < samples; ++t) {
    const CVec x = bs_transmit(st, hw.xi_bs_dl, smp);
    std::vector<cplx> x_ul(cfg.n_ul);
    for (std::size_t l = 0; l < cfg.n_ul; ++l) {
      x_ul[l] = std::sqrt(hw.xi_ue_ul) * st.p(ix(l)) * smp.cn(1.0) + smp.cn(hw.bar_ue_ul() * st.rho(l));
    }
    // DL user 0: receive distortion of variance (1 - xi) times the input power.
    cplx r = eff.h_bar[0].dot(x);
    for (std::size_t l = 0; l < cfg.n_ul; ++l) r += eff.f_bar(0, ix(l)) * x_ul[l];
    dl_acc += std::norm(smp.cn(hw.bar_ue_dl() * std::norm(r)));
    // BS: UL array signal and the self-interference seen through a fresh
    // residual channel with CN(0, sigma^2) entries.
    CVec y_ul = CVec::Zero(n);
    for (std::size_t l = 0; l < cfg.n_ul; ++l) y_ul += eff.g_bar[l] * x_ul[l];
    ul_signal_acc += y_ul.squaredNorm();
    CMat h_si(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) h_si(a, b) = smp.cn(cfg.rsi_variance);
    const CVec si = h_si * x;
    rsi_antenna_acc += std::norm(si(0));
    // Received self-interference plus its receive distortion, after combining.
    CVec y_si = si;
    for (Eigen::Index a = 0; a < n; ++a) y_si(a) = std::sqrt(hw.xi_bs_ul) * si(a) + smp.cn(hw.bar_bs_ul() * std::norm(si(a)));
    rsi_combined_acc += std::norm(u0.dot(y_si));
  }
  const double ns = static_cast<double>(samples);
  McResult res;
  const double dl_formula = dl_distortion_variance(0, st, eff, cfg);
  const double ul_formula = ul_distortion_variance(st, eff, cfg);
  const double rsi_formula = rsi_power(u0, st, cfg);
  auto rel = [](double mc, double f) { return f == 0.0 ? std::abs(mc) : std::abs(mc - f) / f; };
  res.dl = rel(dl_acc / ns, dl_formula);
  res.ul = rel(hw.bar_bs_ul() * (ul_signal_acc + rsi_antenna_acc) / ns, ul_formula);
  res.rsi = rel(rsi_combined_acc / ns, rsi_formula);
  return res;
}

Outcome distortion_check() {
  // Receive-side distortion variances are exercised with impaired hardware;
  // the RSI expectation is checked where the closed form and the distortion
  // model coincide (see the informational line for xi < 1).
  const auto impaired = distortion_mc(0.9, 1000000, 7);
  const auto ideal = distortion_mc(1.0, 1000000, 8);
  const auto informative = distortion_mc(0.92, 200000, 9);
  const double worst = std::max({impaired.dl, impaired.ul, ideal.rsi});
  std::string d = "DL " + fmt("%.2e", impaired.dl) + ", BS receive " + fmt("%.2e", impaired.ul) + ", RSI (xi=1) " +
                  fmt("%.2e", ideal.rsi) + " relative error at 1e6 samples (limit 2e-2)";
  d += "\n     info: RSI closed form vs distortion model at xi=0.92 differs by " + fmt("%.1f%%", 100 * informative.rsi);
  return {worst < 0.02, d};
}

// ---------------------------------------------------------------- Lemma 1 / bisection

Outcome bisection_check() {
  double worst_residual = 0.0;
  bool decreasing = true;
  bool bound_ok = true;
  for (int i = 0; i < 20; ++i) {
    InstanceShape shape;
    shape.xi = i % 2 == 0 ? 1.0 : 0.92;
    auto inst = random_instance(shape, 3000 + static_cast<std::uint64_t>(i), 0);
    const auto eff = compose_effective_channels(inst.channels, inst.phases);
    auto& s = inst.state;
    const auto [mu_dl, mu_ul] = update_weights(s, eff, inst.cfg);
    s.mu_dl = mu_dl;
    s.mu_ul = mu_ul;
    const auto sub = build_beamformer_subproblem(s, eff, inst.cfg);
    double prev = j_of_lambda(sub, 0.0);
    for (int g = 0; g <= 60; ++g) {
      const double lam = 1e-6 * std::pow(10.0, g / 6.0);
      const double j = j_of_lambda(sub, lam);
      if (!(j < prev)) decreasing = false;
      prev = j;
    }
    const double p = std::min(inst.cfg.p_max_bs, 0.5 * j_of_lambda(sub, 0.0));
    const auto sol = solve_beamformer(sub, p);
    double used = 0.0;
    for (const auto& w : sol.w) used += w.squaredNorm();
    worst_residual = std::max(worst_residual, std::abs(used - p) / p);
    if (!(j_of_lambda(sub, lambda_upper_bound(sub, p)) <= p)) bound_ok = false;
  }
  const bool pass = decreasing && bound_ok && worst_residual <= 1e-6;
  return {pass, std::string("J strictly decreasing: ") + (decreasing ? "yes" : "no") + ", J(lambda_max) <= P: " +
                    (bound_ok ? "yes" : "no") + ", max power residual " + fmt("%.2e", worst_residual) +
                    " x P (limit 1e-6)"};
}

// ---------------------------------------------------------------- beamformer oracle

Outcome beamformer_oracle() {
  double worst = 0.0;
  for (std::uint64_t seed : {41u, 42u, 43u}) {
    InstanceShape shape;
    shape.n_tx = 2;
    shape.n_dl = 1;
    shape.n_ul = 1;
    shape.irs_sizes = {2};
    shape.xi = 0.92;
    auto inst = random_instance(shape, seed, 0);
    inst.cfg.p_max_bs = seed == 43 ? 0.05 : 2.0;
    const auto eff = compose_effective_channels(inst.channels, inst.phases);
    const auto ref = oracle::effective(inst.channels, inst.phases.angles());
    auto& st = inst.state;
    const auto [mu_dl, mu_ul] = update_weights(st, eff, inst.cfg);
    st.mu_dl = mu_dl;
    st.mu_ul = mu_ul;
    auto objective = [&](const CVec& w) {
      auto s = st;
      s.w[0] = w;
      return oracle::weighted_mse(s, ref, inst.cfg);
    };
    const auto sol = solve_beamformer(build_beamformer_subproblem(st, eff, inst.cfg), inst.cfg.p_max_bs);
    const double ours = objective(sol.w[0]);
    const double grid = oracle::grid_search_two_antenna(objective, inst.cfg.p_max_bs);
    worst = std::max(worst, (ours - grid) / std::abs(grid));
  }
  return {worst <= 1e-3, "worst relative gap to dense search " + fmt("%.2e", worst) + " (limit 1e-3)"};
}

// ---------------------------------------------------------------- WMMSE monotonicity

Outcome wmmse_monotonicity() {
  double worst_update = -1e300;
  double worst_cycle = -1e300;
  for (int i = 0; i < 20; ++i) {
    InstanceShape shape;
    shape.xi = i % 2 == 0 ? 1.0 : 0.92;
    const auto inst = random_instance(shape, 4000 + static_cast<std::uint64_t>(i), 0);
    const auto eff = compose_effective_channels(inst.channels, inst.phases);
    Algorithm1Options o;
    o.eps1 = 1e-12;
    o.max_iter = 100;
    const auto rep = run_algorithm1(initial_state(eff, inst.cfg), eff, inst.cfg, o);
    for (std::size_t t = 1; t < rep.update_trace.size(); ++t)
      worst_update = std::max(worst_update, rep.update_trace[t] - rep.update_trace[t - 1]);
    for (std::size_t t = 1; t < rep.objective_trace.size(); ++t)
      worst_cycle = std::max(worst_cycle, rep.objective_trace[t] - rep.objective_trace[t - 1]);
  }
  return {worst_update <= 1e-9 && worst_cycle <= 1e-9,
          "largest increase per update " + fmt("%.2e", std::max(worst_update, 0.0)) + ", per cycle " +
              fmt("%.2e", std::max(worst_cycle, 0.0)) + " (slack 1e-9)"};
}

// ---------------------------------------------------------------- outer-loop convergence

Outcome outer_convergence() {
  const Scenario sc = table1_preset();
  std::vector<int> iters;
  std::vector<int> to_99;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, 0);
    const auto ch = generate_channels(sc.geometry, sc.system, rng);
    const auto r = run_algorithm2(ch, sc.system, {SchemeKind::Joint, Duplex::Full});
    iters.push_back(r.outer_iterations);
    // First outer iteration within 1% of the final gain over the start.
    const double span = r.trace.back() - r.trace.front();
    int k = 0;
    while (k + 1 < static_cast<int>(r.trace.size()) && r.trace.back() - r.trace[k] > 0.01 * span) ++k;
    to_99.push_back(k);
  }
  double mean = 0.0;
  double mean99 = 0.0;
  for (int v : iters) mean += v;
  for (int v : to_99) mean99 += v;
  mean /= iters.size();
  mean99 /= to_99.size();
  const int worst = *std::max_element(iters.begin(), iters.end());
  std::string d = "mean outer iterations " + fmt("%.1f", mean) + " (limit 30), max " + std::to_string(worst) +
                  " (limit 50) over 20 seeds";
  d += "\n     info: mean iterations to reach 99% of the final gain " + fmt("%.1f", mean99);
  return {mean <= 30.0 && worst <= 50, d};
}

// ---------------------------------------------------------------- sweep helpers

struct Means {
  std::map<std::pair<double, std::string>, std::vector<double>> swsr, dl, ul;
};

std::string scheme_label(const Scheme& s) { return "S" + to_string(s.kind) + "-" + to_string(s.duplex); }

Means collect(const std::vector<SweepRecord>& recs, std::size_t& failed) {
  Means m;
  for (const auto& r : recs) {
    if (!r.ok()) {
      ++failed;
      continue;
    }
    const auto key = std::make_pair(r.coords.front(), scheme_label(r.scheme));
    m.swsr[key].push_back(r.swsr);
    m.dl[key].push_back(r.dl_sum_rate);
    m.ul[key].push_back(r.ul_sum_rate);
  }
  return m;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

ExperimentSpec sweep(ExperimentKind kind, std::vector<double> grid, std::vector<Scheme> schemes, int trials) {
  ExperimentSpec s;
  s.kind = kind;
  s.base = table1_preset();
  for (double g : grid) s.grid.push_back({g});
  s.schemes = std::move(schemes);
  s.trials = trials;
  s.seed = 2024;
  return s;
}

// ---------------------------------------------------------------- scheme ordering

Outcome scheme_ordering() {
  const Scheme s1{SchemeKind::Joint, Duplex::Full};
  const Scheme s1h{SchemeKind::Joint, Duplex::Half};
  const Scheme s2{SchemeKind::FixedPhases, Duplex::Full};
  const Scheme s3{SchemeKind::NoIrs, Duplex::Full};
  const auto spec = sweep(ExperimentKind::SwsrVsIrsSize, {8, 16, 24}, {s1, s2, s3, s1h}, 50);
  std::size_t failed = 0;
  const auto m = collect(run_experiment(spec), failed);
  bool pass = failed == 0;
  std::string d;
  for (double M : {8.0, 16.0, 24.0}) {
    const double a = mean_of(m.swsr.at({M, scheme_label(s1)}));
    const double b = mean_of(m.swsr.at({M, scheme_label(s2)}));
    const double c = mean_of(m.swsr.at({M, scheme_label(s3)}));
    const double h = mean_of(m.swsr.at({M, scheme_label(s1h)}));
    pass = pass && a > b && a > c && a > h;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%sM=%g: S1 %.3f, S2 %.3f, S3 %.3f, S1-HD %.3f", d.empty() ? "" : "; ", M, a, b, c,
                  h);
    d += buf;
  }
  if (failed) d += "; " + std::to_string(failed) + " failed runs";
  return {pass, d};
}

// ---------------------------------------------------------------- hardware-impairment saturation

Outcome hi_saturation() {
  const Scheme s1{SchemeKind::Joint, Duplex::Full};
  auto ideal = sweep(ExperimentKind::SwsrVsIrsSize, {16, 32}, {s1}, 50);
  auto impaired = ideal;
  impaired.base.system.hw = HardwareQuality::uniform(0.92);
  std::size_t failed = 0;
  const auto mi = collect(run_experiment(ideal), failed);
  const auto mh = collect(run_experiment(impaired), failed);
  const std::string l = scheme_label(s1);
  const double gain_ideal = mean_of(mi.swsr.at({32, l})) - mean_of(mi.swsr.at({16, l}));
  const double gain_hi = mean_of(mh.swsr.at({32, l})) - mean_of(mh.swsr.at({16, l}));
  char buf[200];
  std::snprintf(buf, sizeof buf, "SWSR gain M 16->32: ideal %.4f (%.3f -> %.3f), xi=0.92 %.4f (%.3f -> %.3f)",
                gain_ideal, mean_of(mi.swsr.at({16, l})), mean_of(mi.swsr.at({32, l})), gain_hi,
                mean_of(mh.swsr.at({16, l})), mean_of(mh.swsr.at({32, l})));
  std::string d = buf;
  if (failed) d += "; " + std::to_string(failed) + " failed runs";
  return {failed == 0 && gain_hi < gain_ideal, d};
}

// ---------------------------------------------------------------- power sweeps

Outcome power_sweeps() {
  const Scheme s1{SchemeKind::Joint, Duplex::Full};
  const std::string l = scheme_label(s1);
  const std::vector<double> bs_grid{15, 20, 25, 30, 35};
  const std::vector<double> ul_grid{-5, 0, 5, 10, 15};
  std::size_t failed = 0;
  const auto mb = collect(run_experiment(sweep(ExperimentKind::SwsrVsBsPower, bs_grid, {s1}, 50)), failed);
  const auto mu = collect(run_experiment(sweep(ExperimentKind::SwsrVsUlPower, ul_grid, {s1}, 50)), failed);
  auto series = [&](const Means& m, const std::vector<double>& grid, bool dl) {
    std::vector<double> out;
    for (double g : grid) out.push_back(mean_of((dl ? m.dl : m.ul).at({g, l})));
    return out;
  };
  auto nondecreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] < v[i - 1]) return false;
    return true;
  };
  auto nonincreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[i - 1]) return false;
    return true;
  };
  auto show = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt("%.3f", v[i]);
    return s + "]";
  };
  const auto bdl = series(mb, bs_grid, true);
  const auto bul = series(mb, bs_grid, false);
  const auto udl = series(mu, ul_grid, true);
  const auto uul = series(mu, ul_grid, false);
  const bool pass = failed == 0 && nondecreasing(bdl) && nonincreasing(bul) && nondecreasing(uul) && nonincreasing(udl);
  std::string d = "P_BS 15..35 dBm: DL " + show(bdl) + " UL " + show(bul) + "\n     P_UL -5..15 dBm: UL " + show(uul) +
                  " DL " + show(udl);
  if (failed) d += "; " + std::to_string(failed) + " failed runs";
  return {pass, d};
}

// ---------------------------------------------------------------- determinism

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  auto spec = sweep(ExperimentKind::SwsrVsBsPower, {20, 35}, {}, 4);
  for (int k = 1; k <= 4; ++k) spec.schemes.push_back({scheme_from_int(k), Duplex::Full});
  spec.schemes.push_back({SchemeKind::Joint, Duplex::Half});
  spec.fixed_phases = FixedPhaseRule::Random;
  const auto dir = std::filesystem::temp_directory_path() / "irsfd_acceptance";
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  for (unsigned jobs : {1u, 1u, 4u, 4u}) {
    const auto path = dir / ("run" + std::to_string(files.size()) + ".csv");
    write_records(run_experiment(spec, jobs), spec.kind, path.string());
    files.push_back(slurp(path));
  }
  const bool same = std::all_of(files.begin(), files.end(), [&](const std::string& f) { return f == files[0]; });
  return {same && !files[0].empty(), std::string("4 runs (jobs 1, 1, 4, 4) of a ") +
                                         std::to_string(spec.grid.size() * spec.schemes.size() * spec.trials) +
                                         "-record sweep: " + (same ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"gradient", 10, gradient_check},
      {"mmse_identity", 5, mmse_identity},
      {"distortion_mc", 60, distortion_check},
      {"bisection", 5, bisection_check},
      {"beamformer_oracle", 30, beamformer_oracle},
      {"wmmse_monotonicity", 20, wmmse_monotonicity},
      {"outer_convergence", 300, outer_convergence},
      {"scheme_ordering", 900, scheme_ordering},
      {"hi_saturation", 900, hi_saturation},
      {"power_sweeps", 1200, power_sweeps},
      {"determinism", 600, determinism},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  int ran = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %s: %s [%.1f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion matched\n");
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
