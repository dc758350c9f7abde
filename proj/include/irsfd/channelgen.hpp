// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "irsfd/types.hpp"

namespace irsfd {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point2& a, const Point2& b);

/// Users are either pinned at fixed points or drawn uniformly (by area) from
/// a disk on every realization.
struct UserPlacement {
  std::vector<Point2> fixed;  // used when non-empty
  Point2 center;
  double radius = 0.0;
  std::size_t count = 0;      // number of users drawn from the disk

  std::size_t size() const { return fixed.empty() ? count : fixed.size(); }
  static UserPlacement at(std::vector<Point2> points);
  static UserPlacement disk(Point2 center, double radius, std::size_t count);
};

struct PathLossExponents {
  double bs_irs = 2.1;
  double irs_user = 2.2;
  double bs_user = 4.0;
  double user_user = 3.1;
};

struct ScenarioGeometry {
  Point2 bs{0.0, 0.0};
  std::vector<Point2> irs;
  UserPlacement dl_users;
  UserPlacement ul_users;
  PathLossExponents exponents;
  double rician_k = 3.9810717055349722;  // 6 dB
  double spacing_ratio = 0.5;            // D / lambda
  bool blocked_direct = false;

  void validate() const;
};

/// Explicit RNG handle: (seed, stream) reproduces a bit-identical sequence.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::mt19937_64& engine() { return engine_; }
  double uniform(double lo, double hi);
  /// CN(0, 1): real and imaginary parts N(0, 1/2).
  cplx complex_normal();

 private:
  std::mt19937_64 engine_;
};

/// Linear power gain of PL(dB) = -35.6 - 10 alpha log10(d). Throws for d <= 0.
double path_loss_gain(double distance_m, double exponent);

/// ULA response: entry m equals exp(j 2 pi ratio m sin(theta)).
CVec steering_vector(std::size_t n, double theta, double spacing_ratio);

/// sqrt(k/(1+k)) a_rows(aoa) a_cols(aod)^H + sqrt(1/(1+k)) NLOS.
CMat rician_matrix(std::size_t rows, std::size_t cols, double theta_aoa, double theta_aod, double kappa,
                   double spacing_ratio, Rng& rng);

/// sqrt(k/(1+k)) a_len(aoa) + sqrt(1/(1+k)) NLOS.
CVec rician_vector(std::size_t len, double theta_aoa, double kappa, double spacing_ratio, Rng& rng);

/// i.i.d. CN(0,1) entries.
CVec rayleigh_vector(std::size_t len, Rng& rng);

/// Realized user positions of one draw.
struct UserLayout {
  std::vector<Point2> dl;
  std::vector<Point2> ul;
};

UserLayout place_users(const ScenarioGeometry& geometry, Rng& rng);

/// Draws one full channel realization. Links touching a surface are Rician
/// with fresh uniform AoA/AoD; BS-user and user-user links are Rayleigh.
/// With `geometry.blocked_direct` the BS-user channels are zero.
ChannelSet generate_channels(const ScenarioGeometry& geometry, const SystemConfig& cfg, Rng& rng);

}  // namespace irsfd
