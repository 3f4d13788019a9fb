#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qrotor/experiment.hpp"
#include "qrotor/gauge.hpp"
#include "qrotor/graph.hpp"
#include "qrotor/rdm.hpp"
#include "qrotor/torus.hpp"

namespace py = pybind11;
using namespace qrotor;

namespace {

std::vector<TorusPoint> points(const std::vector<std::vector<double>>& xs) {
  std::vector<TorusPoint> out;
  for (const auto& x : xs) out.emplace_back(std::span<const double>(x));
  return out;
}

ExperimentConfig config_from(const std::string& text, const std::string& out_dir) {
  ExperimentConfig cfg = parse_config(nlohmann::json::parse(text));
  if (!out_dir.empty()) {
    Overrides o;
    o.out_dir = out_dir;
    cfg = apply_overrides(cfg, o);
  }
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Feynman-Kac loop simulator for quantum rotators";
  m.attr("__version__") = QROTOR_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("heat_kernel",
        [](const std::vector<double>& x, const std::vector<double>& y, double beta, double tolerance) {
          if (x.size() != y.size()) throw std::invalid_argument("heat_kernel: dimension mismatch");
          return heat_kernel(TorusPoint(std::span<const double>(x)), TorusPoint(std::span<const double>(y)),
                             HeatKernelParams::for_beta(beta, tolerance));
        },
        py::arg("x"), py::arg("y"), py::arg("beta"), py::arg("tolerance") = 1e-12);
  m.def("default_truncation", &default_truncation, py::arg("beta"), py::arg("tolerance") = 1e-12);

  m.def("free_kernel",
        [](const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y, double beta) {
          return free_kernel(KernelPair{points(x), points(y)}, beta);
        },
        py::arg("x"), py::arg("y"), py::arg("beta"), "Free reduced kernel; x and y list one point per site.");
  m.def("free_kernel_matrix",
        [](double beta, int grid, int trunc) {
          return free_kernel_matrix(beta, grid, trunc > 0 ? trunc : default_truncation(beta)).values;
        },
        py::arg("beta"), py::arg("m"), py::arg("trunc") = 0, "trunc <= 0 picks the 1e-12 truncation.");
  m.def("trace_norm", [](const Eigen::MatrixXd& a) { return trace_norm(a); }, py::arg("a"));
  m.def("lemma11_sweep", &lemma11_sweep, py::arg("beta"), py::arg("m"), py::arg("n_max"));

  m.def("gauge_z", &gauge_z, py::arg("u"));
  m.def("gauge_q", &gauge_q, py::arg("b"));
  m.def("gauge_vartheta", &gauge_vartheta, py::arg("a"), py::arg("b"));
  m.def("psi_sweep",
        [](const std::vector<int>& ns, int rbar, double j) {
          py::list rows;
          for (const auto& r : psi_sweep(ns, rbar, j))
            rows.append(py::dict(py::arg("n") = r.n, py::arg("q") = r.q, py::arg("psi") = r.psi,
                                 py::arg("psi_q") = r.psi_q));
          return rows;
        },
        py::arg("ns"), py::arg("rbar"), py::arg("j") = 1.0);

  m.def("box_sphere_sizes",
        [](int extent, const std::string& metric) {
          const Graph g = build_lattice({LatticeKind::square_box, extent, parse_metric(metric), 3});
          std::vector<std::size_t> out;
          for (int r = 0; r <= extent; ++r) out.push_back(g.sphere(g.origin(), r).size());
          return out;
        },
        py::arg("extent"), py::arg("metric") = "sup", "#Sigma(o, r) for r = 0..extent on the square box.");

  m.def("config_hash", [](const std::string& text) { return config_from(text, "").hash(); }, py::arg("config_json"));
  m.def("resolve_config", [](const std::string& text) { return config_from(text, "").resolved.dump(); },
        py::arg("config_json"), "Validated config with every default filled in, as JSON text.");
  m.def("run_experiment",
        [](const std::string& text, const std::string& out_dir) {
          const ExperimentConfig cfg = config_from(text, out_dir);
          TaskOutcome outcome;
          {
            py::gil_scoped_release release;
            outcome = run_experiment(cfg);
          }
          return py::make_tuple(outcome.pass, outcome.files, outcome.summary.dump());
        },
        py::arg("config_json"), py::arg("out_dir") = "",
        "Run one task; returns (pass, files, summary JSON text).");
}
