#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fractalwalk/contfrac.hpp"
#include "fractalwalk/experiments.hpp"
#include "fractalwalk/groups.hpp"
#include "fractalwalk/ifs.hpp"
#include "fractalwalk/lattice.hpp"
#include "fractalwalk/randwalk.hpp"
#include "fractalwalk/rational.hpp"

namespace py = pybind11;

namespace {

// Python sees plain floats/strings; exact rationals stay on the C++ side.
fw::RunConfig config_from_dict(const py::dict& d) {
  fw::RunConfig c;
  for (auto item : d) {
    const std::string key = py::cast<std::string>(item.first);
    auto v = item.second;
    if (key == "experiment") c.experiment = py::cast<std::string>(v);
    else if (key == "system") c.system = py::cast<std::string>(v);
    else if (key == "alpha") c.alpha = py::cast<std::string>(v);
    else if (key == "blocks") c.blocks = py::cast<std::string>(v);
    else if (key == "block_weights")
      c.block_weights = py::cast<std::string>(v);
    else if (key == "q_list") c.q_list = py::cast<std::string>(v);
    else if (key == "conj_offset") c.conj_offset = py::cast<std::string>(v);
    else if (key == "lambda") c.lambda = py::cast<std::string>(v);
    else if (key == "n") c.n = py::cast<long long>(v);
    else if (key == "points") c.points = py::cast<int>(v);
    else if (key == "depth") c.depth = py::cast<int>(v);
    else if (key == "digits") c.digits = py::cast<int>(v);
    else if (key == "trials") c.trials = py::cast<int>(v);
    else if (key == "level") c.level = py::cast<int>(v);
    else if (key == "M") c.M = py::cast<int>(v);
    else if (key == "N") c.N = py::cast<int>(v);
    else if (key == "branches") c.branches = py::cast<int>(v);
    else if (key == "words") c.words = py::cast<int>(v);
    else if (key == "k_max") c.k_max = py::cast<int>(v);
    else if (key == "q_max") c.q_max = py::cast<long long>(v);
    else if (key == "t_max") c.t_max = py::cast<double>(v);
    else if (key == "dt") c.dt = py::cast<double>(v);
    else if (key == "tol") c.tol = py::cast<double>(v);
    else if (key == "seed") {
      c.seed = py::cast<std::uint64_t>(v);
      c.seed_set = true;
    } else
      throw fw::ConfigError("unknown config key: " + key);
  }
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "random matrix walks, twisted lattices, and certified "
      "continued-fraction statistics";

  py::register_exception<fw::ConfigError>(m, "ConfigError");

  py::class_<fw::IFSDescription>(m, "System")
      .def_property_readonly("name",
                             [](const fw::IFSDescription& s) { return s.name; })
      .def("alphabet_size", &fw::IFSDescription::alphabet_size)
      .def("ambient_dim", &fw::IFSDescription::ambient_dim)
      .def("weights",
           [](const fw::IFSDescription& s) { return s.weights; })
      .def("ratio_of", &fw::IFSDescription::ratio_of);

  m.def("system", &fw::resolve_system, py::arg("spec"),
        "resolve a preset spec or description file");
  m.def(
      "similarity_dimension",
      [](const fw::IFSDescription& s) { return fw::similarity_dimension(s).s; },
      py::arg("system"));
  m.def("contraction_on_average", &fw::contraction_on_average,
        py::arg("system"));
  m.def(
      "coding_point",
      [](const fw::IFSDescription& s, const std::vector<int>& symbols) {
        fw::CodedPoint p = fw::coding_point(s, fw::Word{symbols});
        return py::make_tuple(p.value, p.error_radius);
      },
      py::arg("system"), py::arg("symbols"),
      "value and certified radius of the coded point of a word");
  m.def(
      "sample_word",
      [](const fw::IFSDescription& s, int n, std::uint64_t seed,
         std::uint64_t stream) {
        return fw::sample_word(s, n, seed, stream).symbols;
      },
      py::arg("system"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0);

  m.def(
      "walk_matrices",
      [](const fw::IFSDescription& s, int M, int N) {
        std::vector<Eigen::MatrixXd> out;
        for (const auto& g : fw::walk_generators(s, M, N)) out.push_back(g.m);
        return out;
      },
      py::arg("system"), py::arg("M"), py::arg("N"),
      "group matrices the walk multiplies by, one per branch");

  m.def(
      "lyapunov_spectrum",
      [](const fw::IFSDescription& s, int M, int N, int level, long long n,
         std::uint64_t seed) {
        fw::WalkSampler walk =
            fw::make_walk_sampler(fw::walk_generators(s, M, N), s.weights);
        fw::Representation rep = fw::make_representation(M, N, level);
        return fw::lyapunov_spectrum(walk, rep, n, seed).exponents;
      },
      py::arg("system"), py::arg("M"), py::arg("N"), py::arg("level"),
      py::arg("n"), py::arg("seed"));

  m.def(
      "walk_systoles",
      [](const fw::IFSDescription& s, int M, int N, long long n,
         std::uint64_t seed) {
        fw::WalkSampler walk =
            fw::make_walk_sampler(fw::walk_generators(s, M, N), s.weights);
        return fw::walk_systole_series(walk, n, seed);
      },
      py::arg("system"), py::arg("M"), py::arg("N"), py::arg("n"),
      py::arg("seed"));

  m.def(
      "flow_systoles",
      [](double alpha, double t_max, double dt) {
        Eigen::MatrixXd a(1, 1);
        a(0, 0) = alpha;
        fw::FlowTrace tr = fw::flow_trace(a, 1, 1, t_max, dt);
        return py::make_tuple(tr.times, tr.systoles);
      },
      py::arg("alpha"), py::arg("t_max"), py::arg("dt"));

  m.def(
      "cf_digits",
      [](const std::string& alpha, int max_digits) {
        fw::ParsedAlpha pa = fw::parse_alpha(alpha);
        return fw::cf_validated(pa.enc, max_digits).digits;
      },
      py::arg("alpha"), py::arg("max_digits") = 1000,
      "certified partial quotients of a parsed target");

  m.def(
      "run",
      [](const py::dict& config) {
        fw::RunConfig cfg = config_from_dict(config);
        fw::RunReport report = fw::run_experiment(cfg);
        py::dict out;
        out["manifest_json"] = fw::dump_json(fw::JsonValue(report.manifest));
        out["csv"] = report.has_csv ? report.csv.dump() : std::string();
        out["pass"] = report.pass;
        out["exit_code"] = report.exit_code;
        return out;
      },
      py::arg("config"),
      "run one experiment from a config dict; returns manifest and series");

  m.attr("experiments") = fw::experiment_names();
  m.attr("__version__") = fw::kToolVersion;
}
