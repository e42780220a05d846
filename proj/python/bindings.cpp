#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "duality_bounds/constraints.hpp"
#include "duality_bounds/corpus.hpp"
#include "duality_bounds/dual_solver.hpp"
#include "duality_bounds/errors.hpp"
#include "duality_bounds/io.hpp"
#include "duality_bounds/objectives.hpp"
#include "duality_bounds/refinement.hpp"
#include "duality_bounds/scattering.hpp"
#include "duality_bounds/verification.hpp"

namespace py = pybind11;
using namespace duality_bounds;

namespace {

// Objects cross the boundary as JSON text; the Python side parses it.
template <class T>
std::string dumps(const T& x) {
  return encode(x).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Certified dual bounds for toy scattering design problems";

  // Leaked on purpose: the translator may run during interpreter teardown.
  static py::handle error = py::exception<Error>(m, "Error", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::enum_<ObjectiveKind>(m, "ObjectiveKind")
      .value("Zero", ObjectiveKind::Zero)
      .value("Extinction", ObjectiveKind::Extinction)
      .value("Absorption", ObjectiveKind::Absorption)
      .value("Scattering", ObjectiveKind::Scattering)
      .value("CompactBoundary", ObjectiveKind::CompactBoundary);
  py::enum_<ConstraintKind>(m, "ConstraintKind")
      .value("Equality", ConstraintKind::Equality)
      .value("InequalityLE", ConstraintKind::InequalityLE);
  py::enum_<DualStatus>(m, "DualStatus")
      .value("Interior", DualStatus::Interior)
      .value("OnEpsBoundary", DualStatus::OnEpsBoundary)
      .value("Lifted", DualStatus::Lifted);
  py::enum_<Termination>(m, "Termination")
      .value("GradientTolerance", Termination::GradientTolerance)
      .value("EpsBoundary", Termination::EpsBoundary)
      .value("Stalled", Termination::Stalled);
  py::enum_<CertificateKind>(m, "CertificateKind")
      .value("StrongDual", CertificateKind::StrongDual)
      .value("GapSuspected", CertificateKind::GapSuspected);

  py::class_<QuadraticForm>(m, "QuadraticForm")
      .def(py::init<ComplexVector, ComplexMatrix, double>(), py::arg("s"), py::arg("a"),
           py::arg("v") = 0.0)
      .def_static("zero", &QuadraticForm::zero)
      .def_property_readonly("dim", &QuadraticForm::dim)
      .def_property_readonly("s", &QuadraticForm::s)
      .def_property_readonly("a", &QuadraticForm::a)
      .def_property_readonly("v", &QuadraticForm::v)
      .def("scaled", &QuadraticForm::scaled)
      .def("__call__", &QuadraticForm::operator())
      .def("to_json", &dumps<QuadraticForm>);

  py::class_<Design>(m, "Design")
      .def(py::init<std::vector<std::uint8_t>>())
      .def_static("from_string", &Design::from_string)
      .def_static("all_zero", &Design::all_zero)
      .def_static("all_one", &Design::all_one)
      .def("__len__", &Design::size)
      .def("__getitem__", &Design::operator[])
      .def("__str__", &Design::to_string)
      .def("__repr__", [](const Design& d) { return "Design('" + d.to_string() + "')"; });

  py::class_<ScatteringProblem>(m, "ScatteringProblem")
      .def_property_readonly("dim", &ScatteringProblem::dim)
      .def_property_readonly("num_blocks", &ScatteringProblem::num_blocks)
      .def_property_readonly("G", &ScatteringProblem::G)
      .def_property_readonly("s", &ScatteringProblem::s)
      .def_property_readonly("v_diagonal", &ScatteringProblem::v_diagonal)
      .def_property_readonly("eps_passivity", &ScatteringProblem::eps_passivity)
      .def_property_readonly("seed", &ScatteringProblem::seed)
      .def("to_json", &dumps<ScatteringProblem>)
      .def_static("from_json",
                  [](const std::string& text) { return decode_problem(Json::parse(text)); });

  m.def("build_toy_problem", &build_toy_problem, py::arg("dim"), py::arg("num_blocks"),
        py::arg("loss") = 0.3, py::arg("coupling") = 0.5, py::arg("seed") = 0);
  m.def("solve_design", &solve_design);
  m.def("make_objective", &make_objective, py::arg("problem"), py::arg("kind"),
        py::arg("strength") = 1.0, py::arg("seed") = 0);

  py::class_<Constraint>(m, "Constraint")
      .def(py::init<QuadraticForm, ConstraintKind, std::string>(), py::arg("form"),
           py::arg("kind") = ConstraintKind::Equality, py::arg("label") = "")
      .def_readonly("form", &Constraint::form)
      .def_readonly("kind", &Constraint::kind)
      .def_readonly("label", &Constraint::label);

  py::class_<ConstraintSet>(m, "ConstraintSet")
      .def(py::init<std::vector<Constraint>, std::size_t>())
      .def("__len__", &ConstraintSet::size)
      .def("__getitem__", &ConstraintSet::operator[])
      .def_property_readonly("compact_index", &ConstraintSet::compact_index)
      .def("to_json", &dumps<ConstraintSet>)
      .def_static("from_json", [](const std::string& text) {
        return decode_constraint_set(Json::parse(text));
      });

  m.def("compact_constraint", &compact_constraint);
  m.def("default_family", &default_family, py::arg("problem"),
        py::arg("backgrounds") = std::vector<Design>{});

  py::class_<ValidityReport>(m, "ValidityReport")
      .def_readonly("passed", &ValidityReport::pass)
      .def_readonly("max_normalized", &ValidityReport::max_normalized)
      .def_readonly("designs_checked", &ValidityReport::designs_checked);
  m.def("validate_on_designs", &validate_on_designs, py::arg("constraints"), py::arg("problem"),
        py::arg("tol") = 1e-8);

  py::class_<LagrangianProblem>(m, "LagrangianProblem")
      .def(py::init<QuadraticForm, ConstraintSet, double>())
      .def_static("with_eps_factor", &LagrangianProblem::with_eps_factor, py::arg("objective"),
                  py::arg("constraints"), py::arg("eps_factor") = 1e-6)
      .def_property_readonly("objective", &LagrangianProblem::objective)
      .def_property_readonly("constraints", &LagrangianProblem::constraints)
      .def_property_readonly("eps", &LagrangianProblem::eps)
      .def_property_readonly("num_multipliers", &LagrangianProblem::num_multipliers)
      .def_property_readonly("compact_index", &LagrangianProblem::compact_index)
      .def("a_phi", &LagrangianProblem::a_phi)
      .def("lagrangian", &LagrangianProblem::lagrangian);

  py::class_<DualState>(m, "DualState")
      .def_readonly("phi", &DualState::phi)
      .def_readonly("lift_alpha", &DualState::lift_alpha)
      .def_readonly("t_star", &DualState::t_star)
      .def_readonly("value", &DualState::value)
      .def_readonly("grad", &DualState::grad)
      .def_readonly("lambda_min", &DualState::lambda_min)
      .def_readonly("status", &DualState::status);
  m.def("eval_dual", &eval_dual);
  m.def("dual_hessian", &dual_hessian);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("eps_factor", &SolverConfig::eps_factor)
      .def_readwrite("grad_tol", &SolverConfig::grad_tol)
      .def_readwrite("max_iters", &SolverConfig::max_iters)
      .def_readwrite("seed", &SolverConfig::seed);

  py::class_<DualSolution>(m, "DualSolution")
      .def_readonly("state", &DualSolution::state)
      .def_readonly("termination", &DualSolution::termination)
      .def_readonly("iterations", &DualSolution::iterations)
      .def_readonly("scale", &DualSolution::scale)
      .def_readonly("projected_grad_norm", &DualSolution::projected_grad_norm)
      .def_readonly("values", &DualSolution::values)
      .def("to_json", &dumps<DualSolution>);
  m.def("minimize_dual", &minimize_dual, py::arg("problem"), py::arg("config") = SolverConfig{},
        py::arg("start") = std::nullopt);

  py::class_<OracleResult>(m, "OracleResult")
      .def_readonly("value", &OracleResult::value)
      .def_readonly("argmax", &OracleResult::argmax)
      .def_readonly("t", &OracleResult::t);
  m.def("oracle_bound", &oracle_bound);
  m.def("dual_scale", &dual_scale);

  py::class_<Certificate>(m, "Certificate")
      .def_readonly("kind", &Certificate::kind)
      .def_readonly("residuals", &Certificate::residuals)
      .def_readonly("max_violation", &Certificate::max_violation)
      .def_readonly("primal_value", &Certificate::primal_value)
      .def_readonly("dual_value", &Certificate::dual_value)
      .def_readonly("gap", &Certificate::gap)
      .def("to_json", &dumps<Certificate>);
  m.def("certify", &certify, py::arg("state"), py::arg("problem"), py::arg("scale"),
        py::arg("cert_tol") = kDefaultCertTol);

  py::class_<RefinementConfig>(m, "RefinementConfig")
      .def(py::init<>())
      .def_readwrite("solver", &RefinementConfig::solver)
      .def_readwrite("cert_tol", &RefinementConfig::cert_tol)
      .def_readwrite("max_restarts", &RefinementConfig::max_restarts)
      .def_readwrite("a_obj", &RefinementConfig::a_obj)
      .def_readwrite("single_shot", &RefinementConfig::single_shot)
      .def_readwrite("hybrid_alpha", &RefinementConfig::hybrid_alpha);

  py::class_<RefinementTrace>(m, "RefinementTrace")
      .def_property_readonly("restarts",
                             [](const RefinementTrace& t) { return t.iterations.size(); })
      .def_readonly("final", &RefinementTrace::final)
      .def_readonly("final_objective", &RefinementTrace::final_objective)
      .def_readonly("final_solution", &RefinementTrace::final_solution)
      .def_readonly("restart_cap_reached", &RefinementTrace::restart_cap_reached)
      .def("to_json", &dumps<RefinementTrace>);
  m.def("run_restart_loop", &run_restart_loop, py::arg("problem"),
        py::arg("config") = RefinementConfig{});
}
