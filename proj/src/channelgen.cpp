// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include "irsfd/channelgen.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "irsfd/error.hpp"

namespace irsfd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

UserPlacement UserPlacement::at(std::vector<Point2> points) {
  UserPlacement p;
  p.fixed = std::move(points);
  return p;
}

UserPlacement UserPlacement::disk(Point2 center, double radius, std::size_t count) {
  UserPlacement p;
  p.center = center;
  p.radius = radius;
  p.count = count;
  return p;
}

void ScenarioGeometry::validate() const {
  const double exps[] = {exponents.bs_irs, exponents.irs_user, exponents.bs_user, exponents.user_user};
  for (double a : exps) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("path-loss exponents must be positive");
  }
  if (!(rician_k >= 0.0)) throw ConfigError("Rician factor must be nonnegative");
  if (!std::isfinite(spacing_ratio)) throw ConfigError("antenna spacing ratio must be finite");
  auto finite = [](const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); };
  if (!finite(bs)) throw ConfigError("BS position must be finite");
  for (const auto& p : irs)
    if (!finite(p)) throw ConfigError("surface positions must be finite");
  for (const auto* users : {&dl_users, &ul_users}) {
    for (const auto& p : users->fixed)
      if (!finite(p)) throw ConfigError("user positions must be finite");
    if (users->fixed.empty() && (!finite(users->center) || !(users->radius >= 0.0))) {
      throw ConfigError("user disk needs a finite center and nonnegative radius");
    }
  }
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  engine_.seed(seq);
}

double Rng::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

cplx Rng::complex_normal() {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(engine_);
  const double im = n(engine_);
  return {re, im};
}

double path_loss_gain(double distance_m, double exponent) {
  if (!(distance_m > 0.0)) {
    throw ConfigError("path loss needs a positive distance, got " + std::to_string(distance_m));
  }
  const double pl_db = -35.6 - 10.0 * exponent * std::log10(distance_m);
  return std::pow(10.0, pl_db / 10.0);
}

CVec steering_vector(std::size_t n, double theta, double spacing_ratio) {
  CVec a(static_cast<Eigen::Index>(n));
  const double step = kTwoPi * spacing_ratio * std::sin(theta);
  for (std::size_t m = 0; m < n; ++m) a(static_cast<Eigen::Index>(m)) = std::polar(1.0, step * static_cast<double>(m));
  return a;
}

CVec rayleigh_vector(std::size_t len, Rng& rng) {
  CVec v(static_cast<Eigen::Index>(len));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
  return v;
}

CMat rician_matrix(std::size_t rows, std::size_t cols, double theta_aoa, double theta_aod, double kappa,
                   double spacing_ratio, Rng& rng) {
  if (!(kappa >= 0.0)) throw ConfigError("Rician factor must be nonnegative");
  const double los_w = std::sqrt(kappa / (1.0 + kappa));
  const double nlos_w = std::sqrt(1.0 / (1.0 + kappa));
  const CVec arrive = steering_vector(rows, theta_aoa, spacing_ratio);
  const CVec depart = steering_vector(cols, theta_aod, spacing_ratio);
  CMat h = los_w * (arrive * depart.adjoint());
  for (Eigen::Index c = 0; c < h.cols(); ++c)
    for (Eigen::Index r = 0; r < h.rows(); ++r) h(r, c) += nlos_w * rng.complex_normal();
  return h;
}

CVec rician_vector(std::size_t len, double theta_aoa, double kappa, double spacing_ratio, Rng& rng) {
  if (!(kappa >= 0.0)) throw ConfigError("Rician factor must be nonnegative");
  const double los_w = std::sqrt(kappa / (1.0 + kappa));
  const double nlos_w = std::sqrt(1.0 / (1.0 + kappa));
  CVec h = los_w * steering_vector(len, theta_aoa, spacing_ratio);
  for (Eigen::Index i = 0; i < h.size(); ++i) h(i) += nlos_w * rng.complex_normal();
  return h;
}

namespace {

std::vector<Point2> draw_users(const UserPlacement& placement, Rng& rng) {
  if (!placement.fixed.empty()) return placement.fixed;
  std::vector<Point2> out;
  out.reserve(placement.count);
  for (std::size_t i = 0; i < placement.count; ++i) {
    // Uniform by area: radius through the square-root transform.
    const double r = placement.radius * std::sqrt(rng.uniform(0.0, 1.0));
    const double a = rng.uniform(0.0, kTwoPi);
    out.push_back({placement.center.x + r * std::cos(a), placement.center.y + r * std::sin(a)});
  }
  return out;
}

double amplitude(const Point2& a, const Point2& b, double exponent) {
  return std::sqrt(path_loss_gain(distance(a, b), exponent));
}

}  // namespace

UserLayout place_users(const ScenarioGeometry& geometry, Rng& rng) {
  UserLayout layout;
  layout.dl = draw_users(geometry.dl_users, rng);
  layout.ul = draw_users(geometry.ul_users, rng);
  return layout;
}

ChannelSet generate_channels(const ScenarioGeometry& geometry, const SystemConfig& cfg, Rng& rng) {
  geometry.validate();
  if (geometry.irs.size() != cfg.n_irs()) {
    throw ConfigError("geometry lists " + std::to_string(geometry.irs.size()) + " surfaces but config has " +
                      std::to_string(cfg.n_irs()));
  }
  if (geometry.dl_users.size() != cfg.n_dl) {
    throw ConfigError("geometry places " + std::to_string(geometry.dl_users.size()) + " DL users but config has " +
                      std::to_string(cfg.n_dl));
  }
  if (geometry.ul_users.size() != cfg.n_ul) {
    throw ConfigError("geometry places " + std::to_string(geometry.ul_users.size()) + " UL users but config has " +
                      std::to_string(cfg.n_ul));
  }

  const UserLayout users = place_users(geometry, rng);
  const auto& e = geometry.exponents;
  const double kappa = geometry.rician_k;
  const double ratio = geometry.spacing_ratio;
  auto angle = [&rng] { return rng.uniform(0.0, kTwoPi); };

  ChannelSet c;
  for (std::size_t r = 0; r < cfg.n_irs(); ++r) {
    const double aoa = angle();
    const double aod = angle();
    c.h_bs_irs.push_back(amplitude(geometry.bs, geometry.irs[r], e.bs_irs) *
                         rician_matrix(cfg.irs_sizes[r], cfg.n_tx, aoa, aod, kappa, ratio, rng));
  }
  c.h_irs_dl.resize(cfg.n_dl);
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    for (std::size_t r = 0; r < cfg.n_irs(); ++r) {
      const double aoa = angle();
      c.h_irs_dl[k].push_back(amplitude(geometry.irs[r], users.dl[k], e.irs_user) *
                              rician_vector(cfg.irs_sizes[r], aoa, kappa, ratio, rng));
    }
  }
  c.g_irs_ul.resize(cfg.n_ul);
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    for (std::size_t r = 0; r < cfg.n_irs(); ++r) {
      const double aoa = angle();
      c.g_irs_ul[l].push_back(amplitude(geometry.irs[r], users.ul[l], e.irs_user) *
                              rician_vector(cfg.irs_sizes[r], aoa, kappa, ratio, rng));
    }
  }
  // Direct links are always drawn so the blocked flag leaves every other
  // realization untouched for the same (seed, stream).
  for (std::size_t k = 0; k < cfg.n_dl; ++k) {
    CVec h = amplitude(geometry.bs, users.dl[k], e.bs_user) * rayleigh_vector(cfg.n_tx, rng);
    if (geometry.blocked_direct) h.setZero();
    c.h_direct.push_back(std::move(h));
  }
  for (std::size_t l = 0; l < cfg.n_ul; ++l) {
    CVec g = amplitude(geometry.bs, users.ul[l], e.bs_user) * rayleigh_vector(cfg.n_tx, rng);
    if (geometry.blocked_direct) g.setZero();
    c.g_direct.push_back(std::move(g));
  }
  c.f_uu = CMat::Zero(static_cast<Eigen::Index>(cfg.n_dl), static_cast<Eigen::Index>(cfg.n_ul));
  for (std::size_t k = 0; k < cfg.n_dl; ++k)
    for (std::size_t l = 0; l < cfg.n_ul; ++l)
      c.f_uu(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
          amplitude(users.ul[l], users.dl[k], e.user_user) * rng.complex_normal();
  return c;
}

}  // namespace irsfd
