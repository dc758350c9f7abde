// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------
//
// Exit codes: 0 success, 1 configuration or usage error, 2 solver error,
// 3 sweep finished with some failed records.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "irsfd/channelgen.hpp"
#include "irsfd/config_io.hpp"
#include "irsfd/error.hpp"
#include "irsfd/harness.hpp"
#include "irsfd/orchestrator.hpp"
#include "irsfd/selftest.hpp"

namespace {

using namespace irsfd;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitPartial = 3;

constexpr const char* kOutputDirEnv = "IRSFD_OUTPUT_DIR";

std::uint64_t parse_seed(const std::string& text) {
  if (text == "auto") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
           static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
  }
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("--seed must be a nonnegative integer or 'auto', got '" + text + "'");
  }
}

Scenario load_config(const std::string& path) {
  if (path.rfind("preset:", 0) == 0) return preset(path.substr(7));
  return load_scenario(path);
}

void write_trace(const RunResult& r, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp + "'");
    out << "iteration,swsr\n";
    for (std::size_t i = 0; i < r.trace.size(); ++i) out << i << ',' << format_double(r.trace[i]) << '\n';
    if (!out) throw Error("I/O error while writing '" + path + "'");
  }
  std::filesystem::rename(tmp, path);
}

struct SolveArgs {
  std::string config;
  int scheme = 1;
  std::string seed = "1";
  std::string duplex = "FD";
  std::string trace;
  bool random_fixed = false;
};

int cmd_solve(const SolveArgs& a) {
  const Scenario sc = load_config(a.config);
  const std::uint64_t seed = parse_seed(a.seed);
  Scheme scheme{scheme_from_int(a.scheme), a.duplex == "HD" ? Duplex::Half : Duplex::Full};
  Rng rng(seed, 0);
  const ChannelSet channels = generate_channels(sc.geometry, sc.system, rng);
  RunOptions opts;
  if (a.random_fixed) opts.initial_phases = random_phases(sc.system.total_elements(), seed, std::uint64_t{1} << 40);
  const RunResult r = run_algorithm2(channels, sc.system, scheme, opts);

  std::printf("scheme %s %s  seed %llu\n", to_string(scheme.kind).c_str(), to_string(scheme.duplex).c_str(),
              static_cast<unsigned long long>(seed));
  std::printf("SWSR          %.6f bpcu\n", r.swsr);
  std::printf("DL sum-rate   %.6f bpcu\n", r.dl_sum_rate);
  std::printf("UL sum-rate   %.6f bpcu\n", r.ul_sum_rate);
  for (Eigen::Index k = 0; k < r.dl_rates.size(); ++k) std::printf("  DL user %ld  %.6f\n", static_cast<long>(k), r.dl_rates(k));
  for (Eigen::Index l = 0; l < r.ul_rates.size(); ++l) std::printf("  UL user %ld  %.6f\n", static_cast<long>(l), r.ul_rates(l));
  int wmmse = 0;
  int ascent = 0;
  for (int n : r.wmmse_iterations) wmmse += n;
  for (int n : r.ascent_iterations) ascent += n;
  std::printf("outer iterations %d (%s), inner WMMSE %d, ascent steps %d\n", r.outer_iterations,
              r.converged ? "converged" : "iteration cap", wmmse, ascent);
  std::printf("matrix solves %llu, gradient evaluations %llu, wall time %.3f s\n",
              static_cast<unsigned long long>(r.counters.matrix_solves),
              static_cast<unsigned long long>(r.counters.gradient_evals), r.wall_time_s);
  if (!a.trace.empty()) {
    write_trace(r, a.trace);
    std::printf("trace written to %s\n", a.trace.c_str());
  }
  return kExitOk;
}

struct SweepArgs {
  std::string spec;
  std::string out;
  unsigned jobs = 0;
  bool timing = false;
};

int cmd_sweep(const SweepArgs& a) {
  ExperimentSpec spec = load_experiment_spec(a.spec);
  if (a.timing) spec.include_timing = true;
  std::string dir = a.out;
  if (dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    dir = env != nullptr && *env != '\0' ? env : ".";
  }
  std::filesystem::create_directories(dir);
  const auto path = (std::filesystem::path(dir) / output_file_name(spec)).string();
  const auto records = run_experiment(spec, a.jobs);
  write_records(records, spec.kind, path, spec.include_timing);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.ok() ? 0 : 1;
  std::printf("%zu records written to %s\n", records.size(), path.c_str());
  if (failed > 0) {
    std::fprintf(stderr, "%zu records failed; see the status column\n", failed);
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_validate(const std::string& config, const std::string& spec) {
  if (config.empty() && spec.empty()) throw ConfigError("validate needs --config or --spec");
  if (!config.empty()) {
    const Scenario sc = load_config(config);
    std::printf("%s: valid scenario (N_t %zu, K %zu, L %zu, M %zu over %zu surfaces)\n", config.c_str(),
                sc.system.n_tx, sc.system.n_dl, sc.system.n_ul, sc.system.total_elements(), sc.system.n_irs());
  }
  if (!spec.empty()) {
    const ExperimentSpec s = load_experiment_spec(spec);
    std::printf("%s: valid %s experiment (%zu grid points, %d trials, %zu schemes)\n", spec.c_str(),
                to_string(s.kind).c_str(), s.grid.size(), s.trials, s.schemes.size());
  }
  return kExitOk;
}

int cmd_selftest(std::uint64_t seed, bool corrupt) {
  SelftestOptions o;
  o.seed = seed;
  o.corrupt_gradient = corrupt;
  const SelftestReport r = run_selftest(o);
  std::fputs(format_report(r).c_str(), stdout);
  return r.all_passed() ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted sum-rate optimization for multi-IRS full-duplex links"};
  app.set_version_flag("--version", std::string("irsfd ") + IRSFD_VERSION + " (Eigen " +
                                        std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION) + ")");
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Optimize one channel draw and print rates");
  s->add_option("--config", solve.config, "Scenario JSON file, or preset:<name>")->required();
  s->add_option("--scheme", solve.scheme, "1 joint, 2 fixed phases, 3 no surfaces, 4 MRT/MRC")
      ->check(CLI::Range(1, 4));
  s->add_option("--seed", solve.seed, "Channel seed, or 'auto'");
  s->add_option("--duplex", solve.duplex, "FD or HD")->check(CLI::IsMember({"FD", "HD"}));
  s->add_option("--trace", solve.trace, "Write the outer SWSR trace to this CSV");
  s->add_flag("--random-fixed-phases", solve.random_fixed, "Seeded random starting phases instead of zeros");

  SweepArgs sweep;
  auto* w = app.add_subcommand("sweep", "Run an experiment spec and write its CSV");
  w->add_option("--spec", sweep.spec, "Experiment spec JSON file")->required();
  w->add_option("--out", sweep.out, std::string("Output directory (default: $") + kOutputDirEnv + " or .)");
  w->add_option("--jobs", sweep.jobs, "Worker threads (0: all cores)");
  w->add_flag("--timing", sweep.timing, "Add a wall_time_s column");

  std::string v_config;
  std::string v_spec;
  auto* v = app.add_subcommand("validate", "Check a scenario or experiment spec");
  v->add_option("--config", v_config, "Scenario JSON file, or preset:<name>");
  v->add_option("--spec", v_spec, "Experiment spec JSON file");

  std::uint64_t t_seed = 1;
  bool corrupt = false;
  auto* t = app.add_subcommand("selftest", "Run the fast numerical self-checks");
  t->add_option("--seed", t_seed, "Seed of the synthetic instances");
  t->add_flag("--corrupt-gradient", corrupt, "Negate the analytic gradient (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*w) return cmd_sweep(sweep);
    if (*v) return cmd_validate(v_config, v_spec);
    if (*t) return cmd_selftest(t_seed, corrupt);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitConfig;
}
