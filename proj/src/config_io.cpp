// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include "irsfd/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "irsfd/error.hpp"

namespace irsfd {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (allowed.count(it.key()) == 0) throw ConfigError("unknown field '" + where + it.key() + "'");
  }
}

template <typename T>
T get_as(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + field + "': " + e.what());
  }
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError("field '" + field + "' must be an object");
  return j;
}

Point2 parse_point(const json& j, const std::string& field) {
  const auto v = get_as<std::vector<double>>(j, field);
  if (v.size() != 2) throw ConfigError("field '" + field + "' must be a pair [x, y]");
  return {v[0], v[1]};
}

std::vector<Point2> parse_points(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("field '" + field + "' must be a list of [x, y] pairs");
  std::vector<Point2> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_point(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

// A scalar or a list of scalars.
std::vector<double> parse_list(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>()};
  return get_as<std::vector<double>>(j, field);
}

UserPlacement parse_users(const json& j, const std::string& field) {
  require_object(j, field);
  reject_unknown(j, {"positions", "center", "radius"}, field + ".");
  if (j.contains("positions")) {
    if (j.contains("center") || j.contains("radius")) {
      throw ConfigError("field '" + field + "' mixes fixed positions with a disk");
    }
    return UserPlacement::at(parse_points(j["positions"], field + ".positions"));
  }
  if (!j.contains("center")) throw ConfigError("field '" + field + "' needs 'positions' or 'center'");
  const double r = j.contains("radius") ? get_as<double>(j["radius"], field + ".radius") : 0.0;
  return UserPlacement::disk(parse_point(j["center"], field + ".center"), r, 0);
}

json users_to_json(const UserPlacement& p) {
  auto point = [](const Point2& q) { return json::array({q.x, q.y}); };
  if (!p.fixed.empty()) {
    json arr = json::array();
    for (const auto& q : p.fixed) arr.push_back(point(q));
    return {{"positions", arr}};
  }
  return {{"center", point(p.center)}, {"radius", p.radius}};
}

template <typename T>
void resize_uniform(std::vector<T>& v, std::size_t n, const std::string& field) {
  if (v.size() == n) return;
  if (v.empty()) throw ConfigError("field '" + field + "' is empty");
  if (std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) != v.end()) {
    throw ConfigError("field '" + field + "' has " + std::to_string(v.size()) + " entries, expected " +
                      std::to_string(n));
  }
  v.assign(n, v.front());
}

void apply_system(SystemConfig& s, const json& j) {
  require_object(j, "system");
  reject_unknown(j,
                 {"n_tx", "n_dl", "n_ul", "irs_sizes", "p_max_bs_dbm", "p_max_ul_dbm", "noise_dl_dbm", "noise_ul_dbm",
                  "rsi_variance_dbm", "hardware", "alpha_dl", "alpha_ul", "beta_dl", "beta_ul"},
                 "system.");
  auto count = [&](const char* key, std::size_t& out) {
    if (!j.contains(key)) return;
    const auto v = get_as<long long>(j[key], std::string("system.") + key);
    if (v < 0) throw ConfigError(std::string("field 'system.") + key + "' must be nonnegative");
    out = static_cast<std::size_t>(v);
  };
  count("n_tx", s.n_tx);
  count("n_dl", s.n_dl);
  count("n_ul", s.n_ul);
  if (j.contains("irs_sizes")) {
    const auto sizes = get_as<std::vector<long long>>(j["irs_sizes"], "system.irs_sizes");
    s.irs_sizes.clear();
    for (auto m : sizes) {
      if (m <= 0) throw ConfigError("field 'system.irs_sizes' entries must be positive");
      s.irs_sizes.push_back(static_cast<std::size_t>(m));
    }
  }
  auto dbm = [&](const char* key, double& out) {
    if (j.contains(key)) out = dbm_to_watts(get_as<double>(j[key], std::string("system.") + key));
  };
  dbm("p_max_bs_dbm", s.p_max_bs);
  dbm("noise_dl_dbm", s.noise_dl);
  dbm("noise_ul_dbm", s.noise_ul);
  if (j.contains("rsi_variance_dbm")) {
    const auto& v = j["rsi_variance_dbm"];
    // null switches the residual self-interference off entirely.
    s.rsi_variance = v.is_null() ? 0.0 : dbm_to_watts(get_as<double>(v, "system.rsi_variance_dbm"));
  }
  if (j.contains("p_max_ul_dbm")) {
    s.p_max_ul.clear();
    for (double d : parse_list(j["p_max_ul_dbm"], "system.p_max_ul_dbm")) s.p_max_ul.push_back(dbm_to_watts(d));
  }
  if (j.contains("alpha_dl")) s.alpha_dl = get_as<double>(j["alpha_dl"], "system.alpha_dl");
  if (j.contains("alpha_ul")) s.alpha_ul = get_as<double>(j["alpha_ul"], "system.alpha_ul");
  if (j.contains("beta_dl")) s.beta_dl = parse_list(j["beta_dl"], "system.beta_dl");
  if (j.contains("beta_ul")) s.beta_ul = parse_list(j["beta_ul"], "system.beta_ul");
  if (j.contains("hardware")) {
    const auto& h = require_object(j["hardware"], "system.hardware");
    reject_unknown(h, {"xi", "xi_ue_dl", "xi_ue_ul", "xi_bs_dl", "xi_bs_ul"}, "system.hardware.");
    if (h.contains("xi")) s.hw = HardwareQuality::uniform(get_as<double>(h["xi"], "system.hardware.xi"));
    auto xi = [&](const char* key, double& out) {
      if (h.contains(key)) out = get_as<double>(h[key], std::string("system.hardware.") + key);
    };
    xi("xi_ue_dl", s.hw.xi_ue_dl);
    xi("xi_ue_ul", s.hw.xi_ue_ul);
    xi("xi_bs_dl", s.hw.xi_bs_dl);
    xi("xi_bs_ul", s.hw.xi_bs_ul);
  }
}

void apply_geometry(ScenarioGeometry& g, const json& j) {
  require_object(j, "geometry");
  reject_unknown(j,
                 {"bs", "irs", "dl_users", "ul_users", "path_loss_exponents", "rician_k", "rician_k_db",
                  "spacing_ratio", "blocked_direct"},
                 "geometry.");
  if (j.contains("bs")) g.bs = parse_point(j["bs"], "geometry.bs");
  if (j.contains("irs")) g.irs = parse_points(j["irs"], "geometry.irs");
  if (j.contains("dl_users")) g.dl_users = parse_users(j["dl_users"], "geometry.dl_users");
  if (j.contains("ul_users")) g.ul_users = parse_users(j["ul_users"], "geometry.ul_users");
  if (j.contains("path_loss_exponents")) {
    const auto& e = require_object(j["path_loss_exponents"], "geometry.path_loss_exponents");
    reject_unknown(e, {"bs_irs", "irs_user", "bs_user", "user_user"}, "geometry.path_loss_exponents.");
    auto ex = [&](const char* key, double& out) {
      if (e.contains(key)) out = get_as<double>(e[key], std::string("geometry.path_loss_exponents.") + key);
    };
    ex("bs_irs", g.exponents.bs_irs);
    ex("irs_user", g.exponents.irs_user);
    ex("bs_user", g.exponents.bs_user);
    ex("user_user", g.exponents.user_user);
  }
  if (j.contains("rician_k") && j.contains("rician_k_db")) {
    throw ConfigError("give either 'geometry.rician_k' or 'geometry.rician_k_db', not both");
  }
  if (j.contains("rician_k")) g.rician_k = get_as<double>(j["rician_k"], "geometry.rician_k");
  if (j.contains("rician_k_db")) g.rician_k = db_to_linear(get_as<double>(j["rician_k_db"], "geometry.rician_k_db"));
  if (j.contains("spacing_ratio")) g.spacing_ratio = get_as<double>(j["spacing_ratio"], "geometry.spacing_ratio");
  if (j.contains("blocked_direct")) g.blocked_direct = get_as<bool>(j["blocked_direct"], "geometry.blocked_direct");
}

}  // namespace

Scenario table1_preset() {
  Scenario s;
  auto& c = s.system;
  c.n_tx = 4;
  c.n_dl = 2;
  c.n_ul = 3;
  c.irs_sizes = {10, 10};
  c.p_max_bs = dbm_to_watts(35.0);
  c.p_max_ul.assign(c.n_ul, dbm_to_watts(11.0));
  c.noise_dl = dbm_to_watts(-100.0);
  c.noise_ul = dbm_to_watts(-110.0);
  c.rsi_variance = dbm_to_watts(-95.0);
  c.hw = HardwareQuality::ideal();
  c.alpha_dl = 1.0;
  c.alpha_ul = 1.0;
  c.set_uniform_weights(1.0);

  auto& g = s.geometry;
  g.bs = {0.0, 0.0};
  g.irs = {{100.0, 0.0}, {-100.0, 0.0}};
  g.dl_users = UserPlacement::disk({100.0, 5.0}, 10.0, c.n_dl);
  g.ul_users = UserPlacement::disk({-100.0, 5.0}, 10.0, c.n_ul);
  g.exponents = PathLossExponents{};
  g.rician_k = db_to_linear(6.0);
  g.spacing_ratio = 0.5;
  g.blocked_direct = false;
  normalize(s);
  return s;
}

Scenario preset(const std::string& name) {
  if (name == "table1") return table1_preset();
  throw ConfigError("unknown preset '" + name + "'");
}

void normalize(Scenario& scenario) {
  auto& c = scenario.system;
  resize_uniform(c.p_max_ul, c.n_ul, "system.p_max_ul_dbm");
  resize_uniform(c.beta_dl, c.n_dl, "system.beta_dl");
  resize_uniform(c.beta_ul, c.n_ul, "system.beta_ul");
  auto& g = scenario.geometry;
  if (g.dl_users.fixed.empty()) g.dl_users.count = c.n_dl;
  if (g.ul_users.fixed.empty()) g.ul_users.count = c.n_ul;
  c.validate();
  g.validate();
  if (g.irs.size() != c.n_irs()) {
    throw ConfigError("geometry lists " + std::to_string(g.irs.size()) + " surfaces but system.irs_sizes has " +
                      std::to_string(c.n_irs()));
  }
  if (g.dl_users.size() != c.n_dl) throw ConfigError("geometry.dl_users positions do not match system.n_dl");
  if (g.ul_users.size() != c.n_ul) throw ConfigError("geometry.ul_users positions do not match system.n_ul");
}

void set_total_elements(Scenario& scenario, std::size_t total) {
  const std::size_t r = scenario.system.n_irs();
  if (r == 0 || total < r) {
    throw ConfigError("cannot split " + std::to_string(total) + " elements over " + std::to_string(r) + " surfaces");
  }
  scenario.system.irs_sizes.assign(r, total / r);
  for (std::size_t i = 0; i < total % r; ++i) ++scenario.system.irs_sizes[i];
}

Scenario parse_scenario(const json& j) {
  require_object(j, "scenario");
  reject_unknown(j, {"preset", "system", "geometry"}, "");
  Scenario s = j.contains("preset") ? preset(get_as<std::string>(j["preset"], "preset")) : Scenario{};
  if (!j.contains("preset") && (!j.contains("system") || !j.contains("geometry"))) {
    throw ConfigError("scenario needs a 'preset' or both 'system' and 'geometry'");
  }
  if (j.contains("system")) apply_system(s.system, j["system"]);
  if (j.contains("geometry")) apply_geometry(s.geometry, j["geometry"]);
  normalize(s);
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return parse_scenario(j);
  } catch (const ConfigError& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

json scenario_to_json(const Scenario& scenario) {
  const auto& c = scenario.system;
  const auto& g = scenario.geometry;
  std::vector<double> p_ul;
  for (double p : c.p_max_ul) p_ul.push_back(watts_to_dbm(p));
  json system = {
      {"n_tx", c.n_tx},
      {"n_dl", c.n_dl},
      {"n_ul", c.n_ul},
      {"irs_sizes", c.irs_sizes},
      {"p_max_bs_dbm", watts_to_dbm(c.p_max_bs)},
      {"p_max_ul_dbm", p_ul},
      {"noise_dl_dbm", watts_to_dbm(c.noise_dl)},
      {"noise_ul_dbm", watts_to_dbm(c.noise_ul)},
      {"rsi_variance_dbm", c.rsi_variance > 0.0 ? json(watts_to_dbm(c.rsi_variance)) : json(nullptr)},
      {"hardware",
       {{"xi_ue_dl", c.hw.xi_ue_dl}, {"xi_ue_ul", c.hw.xi_ue_ul}, {"xi_bs_dl", c.hw.xi_bs_dl}, {"xi_bs_ul", c.hw.xi_bs_ul}}},
      {"alpha_dl", c.alpha_dl},
      {"alpha_ul", c.alpha_ul},
      {"beta_dl", c.beta_dl},
      {"beta_ul", c.beta_ul},
  };
  json irs = json::array();
  for (const auto& p : g.irs) irs.push_back({p.x, p.y});
  json geometry = {
      {"bs", {g.bs.x, g.bs.y}},
      {"irs", irs},
      {"dl_users", users_to_json(g.dl_users)},
      {"ul_users", users_to_json(g.ul_users)},
      {"path_loss_exponents",
       {{"bs_irs", g.exponents.bs_irs},
        {"irs_user", g.exponents.irs_user},
        {"bs_user", g.exponents.bs_user},
        {"user_user", g.exponents.user_user}}},
      {"rician_k", g.rician_k},
      {"spacing_ratio", g.spacing_ratio},
      {"blocked_direct", g.blocked_direct},
  };
  return {{"system", system}, {"geometry", geometry}};
}

}  // namespace irsfd
