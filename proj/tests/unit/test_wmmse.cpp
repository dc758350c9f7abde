// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include <doctest.h>

#include <cmath>

#include "irsfd/channelgen.hpp"
#include "irsfd/model.hpp"
#include "irsfd/selftest.hpp"
#include "irsfd/wmmse.hpp"
#include "../support/oracles.hpp"

using namespace irsfd;

namespace {

struct Fixture {
  RandomInstance inst;
  EffectiveChannels eff;
  oracle::Effective ref;
};

Fixture make(std::uint64_t seed, double xi = 0.93) {
  InstanceShape shape;
  shape.xi = xi;
  Fixture f{random_instance(shape, seed, 11), {}, {}};
  f.eff = compose_effective_channels(f.inst.channels, f.inst.phases);
  f.ref = oracle::effective(f.inst.channels, f.inst.phases.angles());
  return f;
}

}  // namespace

TEST_CASE("MSE expressions match the covariance oracle") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto f = make(seed);
    for (std::size_t k = 0; k < f.inst.cfg.n_dl; ++k) {
      const double ref = oracle::dl_mse(k, f.inst.state.u1(static_cast<Eigen::Index>(k)), f.inst.state, f.ref, f.inst.cfg);
      CHECK(mse_dl(k, f.inst.state, f.eff, f.inst.cfg) == doctest::Approx(ref).epsilon(1e-10));
    }
    for (std::size_t l = 0; l < f.inst.cfg.n_ul; ++l) {
      const double ref = oracle::ul_mse(l, f.inst.state.u[l], f.inst.state, f.ref, f.inst.cfg);
      CHECK(mse_ul(l, f.inst.state, f.eff, f.inst.cfg) == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("receiver updates minimize the oracle MSE") {
  auto f = make(2);
  auto& st = f.inst.state;
  const auto& cfg = f.inst.cfg;
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    const cplx u = update_u1k(k, st, f.eff, cfg);
    const double best = oracle::dl_mse(k, u, st, f.ref, cfg);
    for (cplx d : {cplx(1e-3, 0), cplx(0, 1e-3), cplx(-1e-3, 0), cplx(0, -1e-3)}) {
      CHECK(oracle::dl_mse(k, u + d, st, f.ref, cfg) > best);
    }
    // MMSE identity e = 1 / (1 + SINR).
    CHECK(best == doctest::Approx(1.0 / (1.0 + oracle::dl_sinr(k, st, f.ref, cfg))).epsilon(1e-10));
  }
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    const CVec u = update_ul(l, st, f.eff, cfg);
    // Closed form R^{-1} c from the oracle covariance.
    const CVec expect = oracle::ul_covariance(st, f.ref, cfg).ldlt().solve(oracle::ul_cross(l, st, f.ref, cfg));
    CHECK((u - expect).norm() < 1e-10 * expect.norm());
    auto probe = st;
    probe.u[l] = u;
    CHECK(oracle::ul_mse(l, u, probe, f.ref, cfg) ==
          doctest::Approx(1.0 / (1.0 + oracle::ul_sinr(l, probe, f.ref, cfg))).epsilon(1e-10));
  }
}

TEST_CASE("weights are inverse MSEs") {
  auto f = make(4);
  const auto [mu_dl, mu_ul] = update_weights(f.inst.state, f.eff, f.inst.cfg);
  for (std::size_t k = 0; k < f.inst.cfg.n_dl; ++k) {
    CHECK(mu_dl(static_cast<Eigen::Index>(k)) * mse_dl(k, f.inst.state, f.eff, f.inst.cfg) == doctest::Approx(1.0));
  }
  for (std::size_t l = 0; l < f.inst.cfg.n_ul; ++l) {
    CHECK(mu_ul(static_cast<Eigen::Index>(l)) * mse_ul(l, f.inst.state, f.eff, f.inst.cfg) == doctest::Approx(1.0));
  }
}

TEST_CASE("transmit power function is nonincreasing and the solution is feasible") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto f = make(seed);
    auto& st = f.inst.state;
    const auto [mu_dl, mu_ul] = update_weights(st, f.eff, f.inst.cfg);
    st.mu_dl = mu_dl;
    st.mu_ul = mu_ul;
    const auto sub = build_beamformer_subproblem(st, f.eff, f.inst.cfg);
    double prev = j_of_lambda(sub, 1e-6);
    for (double lam : {1e-4, 1e-2, 1.0, 1e2}) {
      const double j = j_of_lambda(sub, lam);
      CHECK(j <= prev * (1 + 1e-12));
      prev = j;
    }
    for (double p : {1e-3, 0.1, 10.0}) {
      const auto sol = solve_beamformer(sub, p);
      double used = 0.0;
      for (const auto& w : sol.w) used += w.squaredNorm();
      CHECK(used <= p * (1 + 1e-8));
      if (sol.lambda > 0.0) CHECK(used == doctest::Approx(p).epsilon(1e-6));
      // w_of_lambda reproduces the returned beamformers.
      const auto w = w_of_lambda(sub, sol.lambda);
      for (std::size_t k = 0; k < w.size(); ++k) CHECK((w[k] - sol.w[k]).norm() < 1e-9 * (1 + w[k].norm()));
    }
  }
}

TEST_CASE("beamformer update is the global minimizer of the weighted MSE (two antennas)") {
  InstanceShape shape;
  shape.n_tx = 2;
  shape.n_dl = 1;
  shape.n_ul = 1;
  shape.irs_sizes = {2};
  shape.xi = 0.9;
  auto inst = random_instance(shape, 9, 0);
  inst.cfg.p_max_bs = 2.0;
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
  CHECK(ours <= grid + 1e-7 * std::abs(grid));
}

TEST_CASE("UL power update beats a dense scan of the oracle objective") {
  auto f = make(6);
  auto& st = f.inst.state;
  const auto& cfg = f.inst.cfg;
  const auto [mu_dl, mu_ul] = update_weights(st, f.eff, cfg);
  st.mu_dl = mu_dl;
  st.mu_ul = mu_ul;
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    const double p = update_power(l, st, f.eff, cfg);
    CHECK(p >= 0.0);
    CHECK(p * p <= cfg.p_max_ul[l] * (1 + 1e-12));
    auto at = [&](double amp) {
      auto s = st;
      s.p(static_cast<Eigen::Index>(l)) = amp;
      return oracle::weighted_mse(s, f.ref, cfg);
    };
    const double ours = at(p);
    const double p_max = std::sqrt(cfg.p_max_ul[l]);
    for (int i = 0; i <= 2000; ++i) CHECK(ours <= at(p_max * i / 2000.0) + 1e-10);
  }
}

TEST_CASE("WMMSE trace is monotone and weighted MSE never increases") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto f = make(seed);
    Algorithm1Options opts;
    opts.eps1 = 1e-9;
    opts.max_iter = 60;
    const auto start = initial_state(f.eff, f.inst.cfg);
    const auto rep = run_algorithm1(start, f.eff, f.inst.cfg, opts);
    REQUIRE(rep.swsr_trace.size() >= 2);
    for (std::size_t i = 1; i < rep.swsr_trace.size(); ++i) {
      CHECK(rep.swsr_trace[i] >= rep.swsr_trace[i - 1] - 1e-9);
      CHECK(rep.objective_trace[i] <= rep.objective_trace[i - 1] + 1e-9);
    }
    // Every block update is a minimization, so the per-update trace is monotone too.
    for (std::size_t i = 1; i < rep.update_trace.size(); ++i) {
      CHECK(rep.update_trace[i] <= rep.update_trace[i - 1] + 1e-9 * (1 + std::abs(rep.update_trace[i - 1])));
    }
    // Reported SWSR matches an independent evaluation of the final state.
    CHECK(rep.swsr_trace.back() == doctest::Approx(oracle::swsr(rep.state, f.ref, f.inst.cfg)).epsilon(1e-9));
    CHECK(rep.state.bs_power() <= f.inst.cfg.p_max_bs * (1 + 1e-8));
  }
}

TEST_CASE("initial state respects the power budgets") {
  auto f = make(1);
  const auto st = initial_state(f.eff, f.inst.cfg);
  CHECK(st.bs_power() == doctest::Approx(f.inst.cfg.p_max_bs));
  for (std::size_t l = 0; l < f.inst.cfg.n_ul; ++l) CHECK(st.rho(l) <= f.inst.cfg.p_max_ul[l] * (1 + 1e-12));
}
