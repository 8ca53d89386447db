// Python bindings: thin pass-through to the C++ core, list/tuple conversions
// via pybind11/stl. Import name: qca_critic.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qca/criticality.hpp"
#include "qca/dense.hpp"
#include "qca/gates.hpp"
#include "qca/lindblad.hpp"
#include "qca/meanfield.hpp"
#include "qca/scan.hpp"
#include "qca/timeseries.hpp"

namespace py = pybind11;
using namespace qca;

PYBIND11_MODULE(qca_critic, m) {
  m.doc() = "reduced-dynamics cellular automaton: evolution, mean field, "
            "criticality estimation";
  m.attr("__version__") = kVersion;

  py::register_exception<validation_error>(m, "ValidationError",
                                           PyExc_ValueError);
  py::register_exception<capacity_error>(m, "CapacityError", PyExc_MemoryError);
  py::register_exception<numerical_error>(m, "NumericalError",
                                          PyExc_ArithmeticError);
  py::register_exception<io_error>(m, "IoError", PyExc_OSError);

  py::class_<GateParams>(m, "GateParams")
      .def_readonly("p1", &GateParams::p1)
      .def_readonly("p2", &GateParams::p2)
      .def_readonly("theta", &GateParams::theta)
      .def_readonly("omega_dt", &GateParams::omega_dt);
  m.def("make_gate_params", &make_gate_params, py::arg("p1"), py::arg("p2"));

  py::class_<TimeSeries>(m, "TimeSeries")
      .def(py::init<>())
      .def_readwrite("t", &TimeSeries::t)
      .def_readwrite("n_mean", &TimeSeries::n_mean)
      .def_readwrite("n_site", &TimeSeries::n_site)
      .def_readwrite("sx_mean", &TimeSeries::sx_mean)
      .def_readwrite("sy_mean", &TimeSeries::sy_mean)
      .def("steps", &TimeSeries::steps);

  m.def(
      "evolve",
      [](const std::string& backend, int l, double p1, double p2, int steps,
         const std::string& initial, int chi_max, double cutoff,
         bool record_sites, bool record_transverse) {
        scan::EvolveJob job;
        job.backend = backend;
        job.l = l;
        job.p1 = p1;
        job.p2 = p2;
        job.steps = steps;
        job.initial = initial;
        job.chi_max = chi_max;
        job.cutoff = cutoff;
        job.record_sites = record_sites;
        job.record_transverse = record_transverse;
        return scan::run_evolve(job, nullptr);
      },
      py::arg("backend"), py::arg("l"), py::arg("p1"), py::arg("p2"),
      py::arg("steps") = 100, py::arg("initial") = "full",
      py::arg("chi_max") = 64, py::arg("cutoff") = 1e-12,
      py::arg("record_sites") = false, py::arg("record_transverse") = false,
      "Run one trajectory; backend 'dense', 'ancilla', or 'mps'.");

  // mean field
  m.def(
      "mf_step",
      [](double n, double sx, double sy, double p1, double p2) {
        const meanfield::MeanFieldState out =
            meanfield::mf_step({n, sx, sy}, make_gate_params(p1, p2));
        return py::make_tuple(out.n, out.sx, out.sy);
      },
      py::arg("n"), py::arg("sx"), py::arg("sy"), py::arg("p1"),
      py::arg("p2"));
  m.def(
      "mf_stationary",
      [](double p1, double p2, long max_iter, double tol) {
        const meanfield::StationaryResult r = meanfield::mf_stationary(
            make_gate_params(p1, p2), {1.0, 0.0, 0.0}, max_iter, tol);
        py::dict d;
        d["n"] = r.state.n;
        d["sx"] = r.state.sx;
        d["sy"] = r.state.sy;
        d["converged"] = r.converged;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("p1"), py::arg("p2"), py::arg("max_iter") = 10000,
      py::arg("tol") = 1e-12);
  m.def("mf_p1_one_closed_form", &meanfield::mf_p1_one_closed_form,
        py::arg("p2"));

  py::class_<meanfield::PhaseDiagram>(m, "PhaseDiagram")
      .def_readonly("p1_grid", &meanfield::PhaseDiagram::p1_grid)
      .def_readonly("p2_grid", &meanfield::PhaseDiagram::p2_grid)
      .def_readonly("n_stationary", &meanfield::PhaseDiagram::n_stationary)
      .def("at", &meanfield::PhaseDiagram::at, py::arg("i1"), py::arg("i2"));
  m.def(
      "mf_phase_diagram",
      [](const std::vector<double>& p1_grid, const std::vector<double>& p2_grid,
         long max_iter, double tol, int jobs) {
        meanfield::PhaseDiagramConfig cfg;
        cfg.max_iter = max_iter;
        cfg.tol = tol;
        cfg.jobs = jobs;
        return meanfield::mf_phase_diagram(p1_grid, p2_grid, cfg);
      },
      py::arg("p1_grid"), py::arg("p2_grid"), py::arg("max_iter") = 10000,
      py::arg("tol") = 1e-12, py::arg("jobs") = 1);

  py::class_<meanfield::CriticalLinePoint>(m, "CriticalLinePoint")
      .def_readonly("p1", &meanfield::CriticalLinePoint::p1)
      .def_readonly("p2_crit", &meanfield::CriticalLinePoint::p2_crit)
      .def_readonly("max_abs_gradient",
                    &meanfield::CriticalLinePoint::max_abs_gradient)
      .def_readonly("discontinuous",
                    &meanfield::CriticalLinePoint::discontinuous)
      .def_readonly("degenerate", &meanfield::CriticalLinePoint::degenerate);
  m.def("mf_critical_line", &meanfield::mf_critical_line, py::arg("diagram"),
        py::arg("gradient_threshold") = 10.0);

  // criticality
  m.def(
      "effective_exponent",
      [](const TimeSeries& ts) {
        std::vector<std::pair<int, double>> out;
        for (const auto& pt : criticality::effective_exponent(ts)) {
          out.emplace_back(pt.t, pt.alpha);
        }
        return out;
      },
      py::arg("series"));
  m.def(
      "loglog_fit",
      [](const TimeSeries& ts, double lo, double hi) {
        const auto fit = criticality::loglog_fit(ts, {lo, hi});
        return py::make_tuple(fit.slope, fit.intercept, fit.r2);
      },
      py::arg("series"), py::arg("lo") = 10.0, py::arg("hi") = 100.0);
  m.def(
      "estimate_alpha",
      [](const TimeSeries& ts, double lo, double hi) {
        return criticality::estimate_alpha(ts, {lo, hi});
      },
      py::arg("series"), py::arg("lo") = 80.0, py::arg("hi") = 100.0);

  // continuous-time comparison
  m.def(
      "lindblad_compare",
      [](int l, double omega_over_gamma, double gamma_dt, double t_final,
         const std::string& rate_convention) {
        const lindblad::ComparisonRecord rec =
            lindblad::compare_qca_to_lindblad(
                l, omega_over_gamma, gamma_dt, t_final,
                lindblad::rate_convention_from_string(rate_convention));
        py::dict d;
        d["p1"] = rec.p1;
        d["p2"] = rec.p2;
        d["gamma_implied"] = rec.gamma_implied;
        d["max_abs_diff"] = rec.max_abs_diff;
        d["terminal_abs_diff"] = rec.terminal_abs_diff;
        d["qca_n_mean"] = rec.qca.n_mean;
        d["lindblad_n_mean"] = rec.lindblad.n_mean;
        return d;
      },
      py::arg("l") = 4, py::arg("omega_over_gamma") = 5.75,
      py::arg("gamma_dt") = 0.01, py::arg("t_final") = 10.0,
      py::arg("rate_convention") = "theta-sq-eq-gamma-dt");
}
