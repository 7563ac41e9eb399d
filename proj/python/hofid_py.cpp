#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hofid/eigensolver.hpp"
#include "hofid/fidelity.hpp"
#include "hofid/hamiltonian.hpp"
#include "hofid/oracle.hpp"
#include "hofid/parallel.hpp"
#include "hofid/scaling.hpp"
#include "hofid/spin_basis.hpp"

namespace py = pybind11;
using namespace hofid;

namespace {

py::array_t<double> to_array(const Vector& v) { return py::array_t<double>(v.size(), v.data()); }

Vector to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
  return Vector(a.data(), a.data() + a.size());
}

LanczosOptions solver_options(std::uint64_t seed, double tolerance, int max_basis, int max_iter) {
  LanczosOptions o;
  o.seed = seed;
  o.tolerance = tolerance;
  o.max_basis = max_basis;
  o.max_iter = max_iter;
  return o;
}

SolveFn chain_solver(int sites, std::uint64_t seed) {
  auto states = std::make_shared<ChainGroundStates>(sites, solver_options(seed, 1e-12, 120, 4000));
  return [states](double lambda) { return states->at(lambda); };
}

}  // namespace

PYBIND11_MODULE(_hofid, m) {
  m.doc() = "Exact diagonalization of the J1-J2 Heisenberg ring and fidelity expansion coefficients";

  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<RefusedPoint>(m, "RefusedPoint", PyExc_RuntimeError);

  m.def("set_workers", &set_worker_count, py::arg("workers"));
  m.def("workers", &worker_count);
  m.def("binomial", &binomial, py::arg("n"), py::arg("k"));

  py::class_<SectorBasis, std::shared_ptr<SectorBasis>>(m, "SectorBasis")
      .def(py::init<int, int>(), py::arg("sites"), py::arg("n_up"))
      .def_property_readonly("sites", &SectorBasis::sites)
      .def_property_readonly("n_up", &SectorBasis::n_up)
      .def_property_readonly("dim", &SectorBasis::dim)
      .def("rank", &SectorBasis::rank, py::arg("mask"))
      .def("unrank", &SectorBasis::unrank, py::arg("index"))
      .def("__contains__", &SectorBasis::contains)
      .def("__len__", &SectorBasis::dim)
      .def("states", [](const SectorBasis& b) {
        auto s = b.states();
        return py::array_t<Mask>(s.size(), s.data());
      });
  m.def("zero_magnetization_basis", [](int sites) { return std::make_shared<SectorBasis>(sites, sites / 2); },
        py::arg("sites"));

  m.def(
      "apply_hamiltonian",
      [](const SectorBasis& basis, double lambda, const py::array_t<double, py::array::c_style | py::array::forcecast>& v) {
        return to_array(apply_hamiltonian({basis.sites(), lambda}, basis, to_vector(v)));
      },
      py::arg("basis"), py::arg("lambda_"), py::arg("v"));
  m.def(
      "dense_hamiltonian",
      [](const SectorBasis& basis, double lambda) { return dense_hamiltonian({basis.sites(), lambda}, basis); },
      py::arg("basis"), py::arg("lambda_"));

  py::class_<GroundStateSolution>(m, "GroundStateSolution")
      .def_readonly("lambda_", &GroundStateSolution::lambda)
      .def_readonly("energy", &GroundStateSolution::energy)
      .def_readonly("second_energy", &GroundStateSolution::second_energy)
      .def_readonly("residual_norm", &GroundStateSolution::residual_norm)
      .def_readonly("iterations", &GroundStateSolution::iterations)
      .def_readonly("converged", &GroundStateSolution::converged)
      .def_readonly("near_degenerate", &GroundStateSolution::near_degenerate)
      .def_property_readonly("gap", &GroundStateSolution::gap)
      .def_property_readonly("vector", [](const GroundStateSolution& s) { return to_array(s.vector); });

  m.def(
      "ground_state",
      [](int sites, double lambda, std::uint64_t seed, double tolerance, int max_basis, int max_iter) {
        const auto basis = zero_magnetization_basis(sites);
        return ground_state(ChainSpec{sites, lambda}, basis, solver_options(seed, tolerance, max_basis, max_iter));
      },
      py::arg("sites"), py::arg("lambda_"), py::arg("seed") = 1, py::arg("tolerance") = 1e-12,
      py::arg("max_basis") = 120, py::arg("max_iter") = 4000);

  py::class_<ExpansionPoint>(m, "ExpansionPoint")
      .def_readonly("lambda_", &ExpansionPoint::lambda)
      .def_readonly("h", &ExpansionPoint::h)
      .def_readonly("chi2", &ExpansionPoint::chi2)
      .def_readonly("chi3", &ExpansionPoint::chi3)
      .def_readonly("energy", &ExpansionPoint::energy)
      .def_readonly("gap", &ExpansionPoint::gap_at_lambda)
      .def_readonly("f_plus_h", &ExpansionPoint::f_plus_h)
      .def_readonly("fit_residual", &ExpansionPoint::fit_residual)
      .def_readonly("halvings", &ExpansionPoint::halvings)
      .def_readonly("step_converged", &ExpansionPoint::step_converged)
      .def_readonly("warnings", &ExpansionPoint::warnings)
      .def_property_readonly("method", [](const ExpansionPoint& p) { return std::string(to_string(p.method)); });

  m.def(
      "chi_point",
      [](int sites, double lambda, const std::string& method, double h, bool richardson, std::uint64_t seed) {
        StepControl control;
        control.h = h;
        control.richardson = richardson;
        const auto solve = chain_solver(sites, seed);
        if (method == "stencil") return chi_from_stencil(solve, lambda, control);
        if (method == "derivative") return chi_from_derivatives(solve, lambda, control);
        throw std::invalid_argument("method must be stencil or derivative");
      },
      py::arg("sites"), py::arg("lambda_"), py::arg("method") = "stencil", py::arg("h") = 1e-3,
      py::arg("richardson") = true, py::arg("seed") = 1);

  py::class_<ExactPoint>(m, "ExactPoint")
      .def_readonly("chi2", &ExactPoint::chi2)
      .def_readonly("chi3", &ExactPoint::chi3)
      .def_readonly("d3E", &ExactPoint::d3E)
      .def_property_readonly("energies", [](const ExactPoint& p) { return p.spectrum.energies; });
  m.def(
      "exact_point",
      [](int sites, double lambda) { return exact_point(zero_magnetization_basis(sites), lambda); },
      py::arg("sites"), py::arg("lambda_"));

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("sites", &SweepRow::sites)
      .def_readonly("lambda_", &SweepRow::lambda)
      .def_readonly("energy", &SweepRow::energy)
      .def_readonly("gap", &SweepRow::gap)
      .def_readonly("f_plus_h", &SweepRow::f_plus_h)
      .def_readonly("chi2", &SweepRow::chi2)
      .def_readonly("chi3", &SweepRow::chi3)
      .def_readonly("chi3_abs", &SweepRow::chi3_abs)
      .def_readonly("fit_residual", &SweepRow::fit_residual)
      .def_readonly("flag", &SweepRow::flag)
      .def_readonly("solves", &SweepRow::solves);

  m.def("lambda_grid", &lambda_grid, py::arg("lambda_min"), py::arg("lambda_max"), py::arg("step"));
  m.def(
      "sweep",
      [](std::vector<int> sizes, double lambda_min, double lambda_max, double lambda_step, double h,
         const std::string& method, std::uint64_t seed, bool warm_start) {
        SweepOptions o;
        o.sizes = std::move(sizes);
        o.lambda_min = lambda_min;
        o.lambda_max = lambda_max;
        o.lambda_step = lambda_step;
        o.step.h = h;
        o.solver.seed = seed;
        o.warm_start = warm_start;
        if (method == "stencil") o.method = MethodSelection::stencil;
        else if (method == "derivative") o.method = MethodSelection::derivative;
        else if (method == "both") o.method = MethodSelection::both;
        else throw std::invalid_argument("method must be stencil, derivative or both");
        py::gil_scoped_release release;
        return sweep(o);
      },
      py::arg("sizes"), py::arg("lambda_min") = 0.0, py::arg("lambda_max") = 0.5, py::arg("lambda_step") = 0.01,
      py::arg("h") = 1e-3, py::arg("method") = "stencil", py::arg("seed") = 1, py::arg("warm_start") = true);

  py::class_<PeakRecord>(m, "PeakRecord")
      .def(py::init([](int sites, double lambda_peak) {
             PeakRecord p;
             p.sites = sites;
             p.lambda_peak = lambda_peak;
             return p;
           }),
           py::arg("sites"), py::arg("lambda_peak"))
      .def_readonly("sites", &PeakRecord::sites)
      .def_readonly("lambda_peak", &PeakRecord::lambda_peak)
      .def_readonly("peak_value", &PeakRecord::peak_value)
      .def_readonly("grid_index", &PeakRecord::grid_index)
      .def_readonly("prominence", &PeakRecord::prominence);

  m.def(
      "find_peak",
      [](std::vector<double> lambdas, std::vector<double> values, double fraction) {
        return find_peak(lambdas, values, relative_prominence(values, fraction));
      },
      py::arg("lambdas"), py::arg("values"), py::arg("prominence") = 0.02);

  py::class_<ScalingResult>(m, "ScalingResult")
      .def_readonly("lambda_c", &ScalingResult::lambda_c)
      .def_readonly("slope", &ScalingResult::slope)
      .def_readonly("intercept_std_error", &ScalingResult::intercept_std_error)
      .def_readonly("slope_std_error", &ScalingResult::slope_std_error)
      .def_readonly("r_squared", &ScalingResult::r_squared)
      .def_readonly("points", &ScalingResult::points)
      .def_property_readonly("variable", [](const ScalingResult& r) { return std::string(to_string(r.variable)); });
  m.def(
      "extrapolate",
      [](std::vector<PeakRecord> peaks, const std::string& variable) {
        return extrapolate(std::move(peaks), parse_scaling_variable(variable));
      },
      py::arg("peaks"), py::arg("variable") = "inv_L");
}
