// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#include "irsfd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "irsfd/channelgen.hpp"
#include "irsfd/error.hpp"

namespace irsfd {

using nlohmann::json;

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ExperimentKind::Convergence, "convergence"},     {ExperimentKind::SwsrVsIrsSize, "swsr_vs_irs_size"},
    {ExperimentKind::SwsrVsBsPower, "swsr_vs_bs_power"}, {ExperimentKind::SwsrVsUlPower, "swsr_vs_ul_power"},
    {ExperimentKind::RateRegion, "rate_region"},       {ExperimentKind::Cdf, "cdf"},
    {ExperimentKind::IrsLocation, "irs_location"},
};

// Stream offset that keeps random fixed phases apart from channel draws.
constexpr std::uint64_t kPhaseStream = std::uint64_t{1} << 40;

template <typename T>
T get_as(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + field + "': " + e.what());
  }
}

Scheme parse_scheme(const json& j, const std::string& field) {
  if (j.is_number_integer()) return {scheme_from_int(j.get<int>()), Duplex::Full};
  if (!j.is_object()) throw ConfigError("field '" + field + "' must be an integer or {\"id\", \"duplex\"}");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "id" && it.key() != "duplex") throw ConfigError("unknown field '" + field + "." + it.key() + "'");
  }
  if (!j.contains("id")) throw ConfigError("field '" + field + ".id' is required");
  Scheme s{scheme_from_int(get_as<int>(j["id"], field + ".id")), Duplex::Full};
  if (j.contains("duplex")) {
    const auto d = get_as<std::string>(j["duplex"], field + ".duplex");
    if (d == "HD") {
      s.duplex = Duplex::Half;
    } else if (d != "FD") {
      throw ConfigError("field '" + field + ".duplex' must be \"FD\" or \"HD\"");
    }
  }
  return s;
}

std::vector<double> parse_grid_point(const json& j, ExperimentKind kind, const std::string& field) {
  if (kind != ExperimentKind::Convergence) return {get_as<double>(j, field)};
  if (!j.is_object()) throw ConfigError("field '" + field + "' must be an object {n_tx, m, n_dl, n_ul}");
  static const char* keys[] = {"n_tx", "m", "n_dl", "n_ul"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(keys), std::end(keys), it.key()) == std::end(keys)) {
      throw ConfigError("unknown field '" + field + "." + it.key() + "'");
    }
  }
  std::vector<double> out;
  for (const char* k : keys) {
    if (!j.contains(k)) throw ConfigError("field '" + field + "." + k + "' is required");
    out.push_back(static_cast<double>(get_as<long long>(j[k], field + "." + k)));
  }
  return out;
}

void apply_tolerances(Tolerances& t, const json& j) {
  if (!j.is_object()) throw ConfigError("field 'tolerances' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string f = "tolerances." + it.key();
    if (it.key() == "eps1") {
      t.eps1 = get_as<double>(*it, f);
    } else if (it.key() == "eps2") {
      t.eps2 = get_as<double>(*it, f);
    } else if (it.key() == "eps3") {
      t.eps3 = get_as<double>(*it, f);
    } else if (it.key() == "max_outer") {
      t.max_outer = get_as<int>(*it, f);
    } else if (it.key() == "max_wmmse_iter") {
      t.max_wmmse_iter = get_as<int>(*it, f);
    } else if (it.key() == "max_ascent_iter") {
      t.max_ascent_iter = get_as<int>(*it, f);
    } else if (it.key() == "bisection_tol") {
      t.bisection_tol = get_as<double>(*it, f);
    } else {
      throw ConfigError("unknown field '" + f + "'");
    }
  }
}

std::string error_tag(const std::exception& e) {
  if (dynamic_cast<const SolverError*>(&e)) return "solver_error";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension_error";
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  return "error";
}

// CSV coordinates of a grid point (without the convergence iteration index).
std::vector<double> record_coords(const ExperimentSpec& spec, std::size_t point) {
  std::vector<double> c = spec.grid[point];
  if (spec.kind == ExperimentKind::RateRegion) c.push_back(1.0 - c[0]);
  return c;
}

// Records of one (grid point, trial) job, indexed by scheme.
using JobRecords = std::vector<std::vector<SweepRecord>>;

JobRecords run_job(const ExperimentSpec& spec, std::size_t point, int trial) {
  JobRecords out(spec.schemes.size());
  auto base_record = [&](std::size_t s) {
    SweepRecord r;
    r.kind = spec.kind;
    r.coords = record_coords(spec, point);
    r.scheme = spec.schemes[s];
    r.trial = trial;
    return r;
  };

  Scenario sc;
  ChannelSet channels;
  try {
    sc = scenario_at(spec, point);
    Rng rng(spec.seed, static_cast<std::uint64_t>(trial));
    channels = generate_channels(sc.geometry, sc.system, rng);
  } catch (const std::exception& e) {
    for (std::size_t s = 0; s < spec.schemes.size(); ++s) {
      SweepRecord r = base_record(s);
      r.status = error_tag(e);
      out[s].push_back(std::move(r));
    }
    return out;
  }

  RunOptions opts;
  opts.tol = spec.tol;
  if (spec.fixed_phases == FixedPhaseRule::Random) {
    opts.initial_phases = random_phases(sc.system.total_elements(), spec.seed, kPhaseStream + static_cast<std::uint64_t>(trial));
  }

  for (std::size_t s = 0; s < spec.schemes.size(); ++s) {
    SweepRecord r = base_record(s);
    try {
      const RunResult res = run_algorithm2(channels, sc.system, spec.schemes[s], opts);
      r.swsr = res.swsr;
      r.dl_sum_rate = res.dl_sum_rate;
      r.ul_sum_rate = res.ul_sum_rate;
      r.iterations = res.outer_iterations;
      r.wall_time_s = res.wall_time_s;
      if (!std::isfinite(r.swsr) || !std::isfinite(r.dl_sum_rate) || !std::isfinite(r.ul_sum_rate)) {
        throw SolverError("non-finite rate");
      }
      if (spec.kind == ExperimentKind::Convergence) {
        for (std::size_t i = 0; i < res.trace.size(); ++i) {
          SweepRecord row = r;
          row.coords.push_back(static_cast<double>(i));
          row.swsr = res.trace[i];
          out[s].push_back(std::move(row));
        }
        continue;
      }
    } catch (const std::exception& e) {
      r = base_record(s);
      r.status = error_tag(e);
      if (spec.kind == ExperimentKind::Convergence) r.coords.push_back(0.0);
    }
    out[s].push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const auto& k : kKindNames) {
    if (name == k.name) return k.kind;
  }
  throw ConfigError("field 'kind': unknown experiment kind '" + name + "'");
}

std::vector<std::string> coordinate_columns(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Convergence: return {"n_tx", "m", "n_dl", "n_ul", "iteration"};
    case ExperimentKind::SwsrVsIrsSize: return {"m"};
    case ExperimentKind::SwsrVsBsPower: return {"p_bs_dbm"};
    case ExperimentKind::SwsrVsUlPower: return {"p_ul_dbm"};
    case ExperimentKind::RateRegion: return {"alpha_dl", "alpha_ul"};
    case ExperimentKind::Cdf: return {"xi"};
    case ExperimentKind::IrsLocation: return {"irs_x"};
  }
  return {};
}

std::vector<std::string> csv_columns(ExperimentKind kind, bool include_timing) {
  std::vector<std::string> cols{"experiment"};
  for (auto& c : coordinate_columns(kind)) cols.push_back(c);
  for (const char* c : {"scheme", "duplex", "trial", "swsr", "dl_sum_rate", "ul_sum_rate", "iterations", "status"}) {
    cols.emplace_back(c);
  }
  if (include_timing) cols.emplace_back("wall_time_s");
  return cols;
}

void ExperimentSpec::validate() const {
  if (grid.empty()) throw ConfigError("field 'grid' must not be empty");
  if (trials < 1) throw ConfigError("field 'trials' must be at least 1");
  if (schemes.empty()) throw ConfigError("field 'schemes' must not be empty");
  const std::size_t width = kind == ExperimentKind::Convergence ? 4 : 1;
  for (const auto& p : grid) {
    if (p.size() != width) throw ConfigError("field 'grid' has a point of the wrong width");
  }
  if (kind == ExperimentKind::IrsLocation && moving_irs >= base.system.n_irs()) {
    throw ConfigError("field 'moving_irs' is out of range");
  }
  // Every grid point must produce a valid scenario.
  for (std::size_t i = 0; i < grid.size(); ++i) scenario_at(*this, i);
}

ExperimentSpec parse_experiment_spec(const json& j) {
  if (!j.is_object()) throw ConfigError("experiment spec must be an object");
  static const std::set<std::string> allowed{"kind",  "tag",        "scenario",     "grid",       "trials",
                                             "schemes", "seed",     "tolerances",   "fixed_phases", "moving_irs",
                                             "line_y", "include_timing"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (allowed.count(it.key()) == 0) throw ConfigError("unknown field '" + it.key() + "'");
  }
  ExperimentSpec s;
  if (!j.contains("kind")) throw ConfigError("field 'kind' is required");
  s.kind = experiment_kind_from_string(get_as<std::string>(j["kind"], "kind"));
  if (j.contains("tag")) s.tag = get_as<std::string>(j["tag"], "tag");
  s.base = j.contains("scenario") ? parse_scenario(j["scenario"]) : table1_preset();
  if (!j.contains("grid") || !j["grid"].is_array()) throw ConfigError("field 'grid' must be a list");
  for (std::size_t i = 0; i < j["grid"].size(); ++i) {
    s.grid.push_back(parse_grid_point(j["grid"][i], s.kind, "grid[" + std::to_string(i) + "]"));
  }
  s.trials = s.kind == ExperimentKind::Cdf ? 500 : 50;
  if (j.contains("trials")) s.trials = get_as<int>(j["trials"], "trials");
  if (j.contains("schemes")) {
    if (!j["schemes"].is_array()) throw ConfigError("field 'schemes' must be a list");
    for (std::size_t i = 0; i < j["schemes"].size(); ++i) {
      s.schemes.push_back(parse_scheme(j["schemes"][i], "schemes[" + std::to_string(i) + "]"));
    }
  } else {
    s.schemes = {{SchemeKind::Joint, Duplex::Full}};
  }
  if (j.contains("seed")) s.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("tolerances")) apply_tolerances(s.tol, j["tolerances"]);
  if (j.contains("fixed_phases")) {
    const auto rule = get_as<std::string>(j["fixed_phases"], "fixed_phases");
    if (rule == "random") {
      s.fixed_phases = FixedPhaseRule::Random;
    } else if (rule != "zero") {
      throw ConfigError("field 'fixed_phases' must be \"zero\" or \"random\"");
    }
  }
  if (j.contains("moving_irs")) s.moving_irs = get_as<std::size_t>(j["moving_irs"], "moving_irs");
  if (j.contains("line_y")) s.line_y = get_as<double>(j["line_y"], "line_y");
  if (j.contains("include_timing")) s.include_timing = get_as<bool>(j["include_timing"], "include_timing");
  s.validate();
  return s;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return parse_experiment_spec(j);
  } catch (const ConfigError& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

Scenario scenario_at(const ExperimentSpec& spec, std::size_t point) {
  Scenario sc = spec.base;
  const auto& p = spec.grid.at(point);
  auto& sys = sc.system;
  switch (spec.kind) {
    case ExperimentKind::Convergence:
      sys.n_tx = static_cast<std::size_t>(p[0]);
      sys.n_dl = static_cast<std::size_t>(p[2]);
      sys.n_ul = static_cast<std::size_t>(p[3]);
      normalize(sc);
      set_total_elements(sc, static_cast<std::size_t>(p[1]));
      break;
    case ExperimentKind::SwsrVsIrsSize:
      if (p[0] < 1.0 || p[0] != std::floor(p[0])) throw ConfigError("field 'grid': element counts must be positive integers");
      set_total_elements(sc, static_cast<std::size_t>(p[0]));
      break;
    case ExperimentKind::SwsrVsBsPower: sys.p_max_bs = dbm_to_watts(p[0]); break;
    case ExperimentKind::SwsrVsUlPower: sys.set_uniform_ul_power(dbm_to_watts(p[0])); break;
    case ExperimentKind::RateRegion:
      if (p[0] < 0.0 || p[0] > 1.0) throw ConfigError("field 'grid': rate-region weights must lie in [0, 1]");
      sys.alpha_dl = p[0];
      sys.alpha_ul = 1.0 - p[0];
      break;
    case ExperimentKind::Cdf: sys.hw = HardwareQuality::uniform(p[0]); break;
    case ExperimentKind::IrsLocation:
      if (spec.moving_irs >= sc.geometry.irs.size()) throw ConfigError("field 'moving_irs' is out of range");
      sc.geometry.irs[spec.moving_irs] = {p[0], spec.line_y};
      break;
  }
  normalize(sc);
  return sc;
}

std::vector<SweepRecord> run_experiment(const ExperimentSpec& spec, unsigned jobs) {
  spec.validate();
  const std::size_t n_points = spec.grid.size();
  const std::size_t n_trials = static_cast<std::size_t>(spec.trials);
  const std::size_t n_jobs = n_points * n_trials;
  std::vector<JobRecords> results(n_jobs);

  unsigned workers = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_jobs));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n_jobs; i = next++) {
      results[i] = run_job(spec, i / n_trials, static_cast<int>(i % n_trials));
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<SweepRecord> out;
  for (std::size_t g = 0; g < n_points; ++g) {
    for (std::size_t s = 0; s < spec.schemes.size(); ++s) {
      for (std::size_t t = 0; t < n_trials; ++t) {
        auto& rows = results[g * n_trials + t][s];
        for (auto& r : rows) out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_records(const std::vector<SweepRecord>& records, ExperimentKind kind, const std::string& path,
                   bool include_timing) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    const auto cols = csv_columns(kind, include_timing);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    const std::size_t width = coordinate_columns(kind).size();
    for (const auto& r : records) {
      if (r.kind != kind || r.coords.size() != width) {
        out.close();
        fs::remove(tmp);
        throw Error("record does not match the '" + to_string(kind) + "' schema while writing '" + path + "'");
      }
      out << to_string(kind);
      for (double c : r.coords) out << ',' << format_double(c);
      out << ',' << to_string(r.scheme.kind) << ',' << to_string(r.scheme.duplex) << ',' << r.trial << ','
          << format_double(r.swsr) << ',' << format_double(r.dl_sum_rate) << ',' << format_double(r.ul_sum_rate)
          << ',' << r.iterations << ',' << r.status;
      if (include_timing) out << ',' << format_double(r.wall_time_s);
      out << '\n';
    }
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("I/O error while writing '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move output into '" + path + "': " + ec.message());
  }
}

std::string output_file_name(const ExperimentSpec& spec) {
  const std::string tag = spec.tag.empty() ? "seed" + std::to_string(spec.seed) : spec.tag;
  return to_string(spec.kind) + "_" + tag + ".csv";
}

}  // namespace irsfd
