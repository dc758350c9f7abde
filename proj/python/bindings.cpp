// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------
//
// Python extension. Scenarios and experiment specs cross the boundary as
// JSON text; the pure-Python wrapper in irsfd/__init__.py accepts dicts.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "irsfd/channelgen.hpp"
#include "irsfd/config_io.hpp"
#include "irsfd/error.hpp"
#include "irsfd/harness.hpp"
#include "irsfd/orchestrator.hpp"
#include "irsfd/selftest.hpp"

namespace py = pybind11;
using namespace irsfd;

namespace {

nlohmann::json parse_text(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

Scenario scenario_from(const std::string& text) { return parse_scenario(parse_text(text)); }

Scheme scheme_of(int id, const std::string& duplex) {
  if (duplex != "FD" && duplex != "HD") throw ConfigError("duplex must be \"FD\" or \"HD\", got '" + duplex + "'");
  return {scheme_from_int(id), duplex == "HD" ? Duplex::Half : Duplex::Full};
}

py::dict result_dict(const RunResult& r) {
  py::dict d;
  d["scheme"] = static_cast<int>(r.scheme.kind);
  d["duplex"] = to_string(r.scheme.duplex);
  d["swsr"] = r.swsr;
  d["dl_rates"] = r.dl_rates;
  d["ul_rates"] = r.ul_rates;
  d["dl_sum_rate"] = r.dl_sum_rate;
  d["ul_sum_rate"] = r.ul_sum_rate;
  d["trace"] = r.trace;
  d["outer_iterations"] = r.outer_iterations;
  d["converged"] = r.converged;
  d["wmmse_iterations"] = r.wmmse_iterations;
  d["ascent_iterations"] = r.ascent_iterations;
  d["phases"] = r.phases.angles();
  d["wall_time_s"] = r.wall_time_s;
  py::dict c;
  c["matrix_solves"] = r.counters.matrix_solves;
  c["eigendecompositions"] = r.counters.eigendecompositions;
  c["bisection_steps"] = r.counters.bisection_steps;
  c["gradient_evals"] = r.counters.gradient_evals;
  c["objective_evals"] = r.counters.objective_evals;
  d["counters"] = c;
  return d;
}

RunOptions options_from(const std::optional<Eigen::VectorXd>& phases) {
  RunOptions o;
  if (phases) o.initial_phases = PhaseVector(*phases);
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted sum-rate optimization for multi-IRS full-duplex links";
  m.attr("__version__") = IRSFD_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<ChannelSet>(m, "ChannelSet", "One channel realization")
      .def_readonly("h_direct", &ChannelSet::h_direct)
      .def_readonly("g_direct", &ChannelSet::g_direct)
      .def_readonly("f_uu", &ChannelSet::f_uu)
      .def_readonly("h_bs_irs", &ChannelSet::h_bs_irs)
      .def_readonly("h_irs_dl", &ChannelSet::h_irs_dl)
      .def_readonly("g_irs_ul", &ChannelSet::g_irs_ul);

  m.def(
      "normalize_scenario", [](const std::string& text) { return scenario_to_json(scenario_from(text)).dump(); },
      py::arg("scenario_json"), "Validate a scenario and return it with every default filled in.");
  m.def(
      "preset", [](const std::string& name) { return scenario_to_json(preset(name)).dump(); }, py::arg("name"),
      "Scenario JSON of a named preset.");

  m.def(
      "generate_channels",
      [](const std::string& text, std::uint64_t seed, std::uint64_t stream) {
        const Scenario sc = scenario_from(text);
        Rng rng(seed, stream);
        return generate_channels(sc.geometry, sc.system, rng);
      },
      py::arg("scenario_json"), py::arg("seed"), py::arg("stream") = 0);

  m.def(
      "solve",
      [](const std::string& text, int scheme, const std::string& duplex, std::uint64_t seed,
         const std::optional<Eigen::VectorXd>& phases) {
        const Scenario sc = scenario_from(text);
        Rng rng(seed, 0);
        const ChannelSet ch = generate_channels(sc.geometry, sc.system, rng);
        const Scheme chosen = scheme_of(scheme, duplex);
        const RunOptions opts = options_from(phases);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_algorithm2(ch, sc.system, chosen, opts);
        }
        return result_dict(r);
      },
      py::arg("scenario_json"), py::arg("scheme") = 1, py::arg("duplex") = "FD", py::arg("seed") = 1,
      py::arg("initial_phases") = py::none(), "Draw one channel realization and optimize it.");

  m.def(
      "solve_channels",
      [](const ChannelSet& ch, const std::string& text, int scheme, const std::string& duplex,
         const std::optional<Eigen::VectorXd>& phases) {
        const Scenario sc = scenario_from(text);
        const Scheme chosen = scheme_of(scheme, duplex);
        const RunOptions opts = options_from(phases);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_algorithm2(ch, sc.system, chosen, opts);
        }
        return result_dict(r);
      },
      py::arg("channels"), py::arg("scenario_json"), py::arg("scheme") = 1, py::arg("duplex") = "FD",
      py::arg("initial_phases") = py::none());

  m.def(
      "run_sweep",
      [](const std::string& spec_text, unsigned jobs) {
        const ExperimentSpec spec = parse_experiment_spec(parse_text(spec_text));
        std::vector<SweepRecord> recs;
        {
          py::gil_scoped_release release;
          recs = run_experiment(spec, jobs);
        }
        const auto coords = coordinate_columns(spec.kind);
        py::list out;
        for (const auto& r : recs) {
          py::dict d;
          d["experiment"] = to_string(r.kind);
          for (std::size_t i = 0; i < coords.size(); ++i) d[py::str(coords[i])] = r.coords[i];
          d["scheme"] = static_cast<int>(r.scheme.kind);
          d["duplex"] = to_string(r.scheme.duplex);
          d["trial"] = r.trial;
          d["swsr"] = r.swsr;
          d["dl_sum_rate"] = r.dl_sum_rate;
          d["ul_sum_rate"] = r.ul_sum_rate;
          d["iterations"] = r.iterations;
          d["status"] = r.status;
          out.append(d);
        }
        return out;
      },
      py::arg("spec_json"), py::arg("jobs") = 0, "Run an experiment spec and return its records.");

  m.def(
      "write_sweep",
      [](const std::string& spec_text, const std::string& path, unsigned jobs) {
        const ExperimentSpec spec = parse_experiment_spec(parse_text(spec_text));
        std::size_t n = 0;
        {
          py::gil_scoped_release release;
          const auto recs = run_experiment(spec, jobs);
          write_records(recs, spec.kind, path, spec.include_timing);
          n = recs.size();
        }
        return n;
      },
      py::arg("spec_json"), py::arg("path"), py::arg("jobs") = 0, "Run an experiment spec and write its CSV.");

  m.def(
      "csv_columns",
      [](const std::string& kind, bool timing) { return csv_columns(experiment_kind_from_string(kind), timing); },
      py::arg("kind"), py::arg("include_timing") = false);

  m.def(
      "selftest",
      [](std::uint64_t seed) {
        SelftestOptions o;
        o.seed = seed;
        const auto rep = run_selftest(o);
        py::list out;
        for (const auto& c : rep.checks) {
          py::dict d;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["metric"] = c.metric;
          d["threshold"] = c.threshold;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 1);
}
