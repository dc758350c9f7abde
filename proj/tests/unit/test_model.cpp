// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include <doctest.h>

#include "irsfd/error.hpp"
#include "irsfd/model.hpp"
#include "irsfd/selftest.hpp"
#include "../support/oracles.hpp"

using namespace irsfd;

namespace {

InstanceShape impaired_shape() {
  InstanceShape s;
  s.xi = 0.9;
  return s;
}

}  // namespace

TEST_CASE("effective channels match explicit per-surface phase matrices") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto inst = random_instance(impaired_shape(), seed, 0);
    const auto eff = compose_effective_channels(inst.channels, inst.phases);
    const auto ref = oracle::effective(inst.channels, inst.phases.angles());
    for (std::size_t k = 0; k < eff.h_bar.size(); ++k) CHECK((eff.h_bar[k] - ref.h_bar[k]).norm() < 1e-12);
    for (std::size_t l = 0; l < eff.g_bar.size(); ++l) CHECK((eff.g_bar[l] - ref.g_bar[l]).norm() < 1e-12);
    CHECK((eff.f_bar - ref.f_bar).norm() < 1e-12);
  }
}

TEST_CASE("zero reflection leaves only the direct links") {
  const auto inst = random_instance({}, 3, 0);
  const CVec zero = CVec::Zero(static_cast<Eigen::Index>(inst.cfg.total_elements()));
  const auto eff = compose_effective_channels(inst.channels, zero);
  CHECK((eff.h_bar[0] - inst.channels.h_direct[0]).norm() == 0.0);
  CHECK((eff.g_bar[1] - inst.channels.g_direct[1]).norm() == 0.0);
  CHECK((eff.f_bar - inst.channels.f_uu).norm() == 0.0);
}

TEST_CASE("reflection vector length is checked") {
  const auto inst = random_instance({}, 1, 0);
  CHECK_THROWS_AS(compose_effective_channels(inst.channels, CVec::Ones(3)), DimensionError);
}

TEST_CASE("SINRs agree with covariance-based oracle under impairments") {
  for (double xi : {1.0, 0.95, 0.8}) {
    InstanceShape shape;
    shape.xi = xi;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto inst = random_instance(shape, seed, 7);
      const auto eff = compose_effective_channels(inst.channels, inst.phases);
      const auto ref = oracle::effective(inst.channels, inst.phases.angles());
      for (std::size_t k = 0; k < inst.cfg.n_dl; ++k) {
        const double a = dl_sinr(k, inst.state, eff, inst.cfg);
        const double b = oracle::dl_sinr(k, inst.state, ref, inst.cfg);
        CHECK(a == doctest::Approx(b).epsilon(1e-10));
      }
      for (std::size_t l = 0; l < inst.cfg.n_ul; ++l) {
        const double a = ul_sinr(l, inst.state, eff, inst.cfg);
        const double b = oracle::ul_sinr(l, inst.state, ref, inst.cfg);
        CHECK(a == doctest::Approx(b).epsilon(1e-10));
      }
      CHECK(swsr(inst.state, eff, inst.cfg) == doctest::Approx(oracle::swsr(inst.state, ref, inst.cfg)).epsilon(1e-10));
    }
  }
}

TEST_CASE("SINR term breakdown") {
  const auto inst = random_instance(impaired_shape(), 5, 0);
  const auto eff = compose_effective_channels(inst.channels, inst.phases);
  SUBCASE("ideal hardware has no distortion terms") {
    auto cfg = inst.cfg;
    cfg.hw = HardwareQuality::ideal();
    const auto d = dl_sinr_terms(0, inst.state, eff, cfg);
    const auto u = ul_sinr_terms(0, inst.state, eff, cfg);
    CHECK(d.self_distortion == 0.0);
    CHECK(d.tx_distortion == 0.0);
    CHECK(u.self_distortion == 0.0);
    CHECK(u.rx_distortion == 0.0);
    // With xi = 1 the RSI bracket reduces to one.
    CHECK(u.rsi == doctest::Approx(cfg.rsi_variance * inst.state.bs_power() * inst.state.u[0].squaredNorm()));
  }
  SUBCASE("noise terms are the configured variances") {
    const auto d = dl_sinr_terms(1, inst.state, eff, inst.cfg);
    const auto u = ul_sinr_terms(2, inst.state, eff, inst.cfg);
    CHECK(d.noise == doctest::Approx(inst.cfg.noise_dl));
    CHECK(u.noise == doctest::Approx(inst.cfg.noise_ul * inst.state.u[2].squaredNorm()));
  }
}

TEST_CASE("rates are weighted by the duplex split and user priorities") {
  auto inst = random_instance({}, 2, 0);
  const auto eff = compose_effective_channels(inst.channels, inst.phases);
  inst.cfg.alpha_dl = 0.3;
  inst.cfg.alpha_ul = 0.7;
  inst.cfg.beta_dl = {2.0, 0.5};
  const auto r = evaluate_rates(inst.state, eff, inst.cfg);
  double expect = 0.0;
  for (std::size_t k = 0; k < 2; ++k) expect += 0.3 * inst.cfg.beta_dl[k] * r.dl(static_cast<Eigen::Index>(k));
  for (std::size_t l = 0; l < 3; ++l) expect += 0.7 * inst.cfg.beta_ul[l] * r.ul(static_cast<Eigen::Index>(l));
  CHECK(r.swsr == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r.dl_sum == doctest::Approx(r.dl.sum()));
  CHECK(r.ul_sum == doctest::Approx(r.ul.sum()));
}

TEST_CASE("RSI bracket") {
  CHECK(HardwareQuality::ideal().rsi_bracket(8) == doctest::Approx(1.0));
  const auto hw = HardwareQuality::uniform(0.9);
  CHECK(hw.rsi_bracket(4) == doctest::Approx(0.9 + 0.9 - 0.81 + 0.01 * 4));
}
