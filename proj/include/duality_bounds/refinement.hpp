#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "duality_bounds/dual_solver.hpp"

namespace duality_bounds {

enum class CertificateKind { StrongDual, GapSuspected };
std::string_view to_string(CertificateKind kind);

struct Certificate {
  CertificateKind kind = CertificateKind::GapSuspected;
  RealVector residuals;        // f_k(t*)
  double max_violation = 0.0;  // max_k |f_k(t*)| / scale (sign-aware for inequalities)
  double primal_value = 0.0;   // f_obj(t*)
  double dual_value = 0.0;
  double gap = 0.0;            // dual_value - primal_value
  double scale = 1.0;
};

inline constexpr double kDefaultCertTol = 1e-7;

/// StrongDual iff t* satisfies every constraint to cert_tol * scale and the
/// primal value matches the dual value to the same tolerance.
Certificate certify(const DualState& state, const LagrangianProblem& L, double scale,
                    double cert_tol = kDefaultCertTol);

/// f_obj - c f_dot.
QuadraticForm subtract_compact(const QuadraticForm& f_obj, const Constraint& f_dot, double c);

struct RestoreConfig {
  int stages = 8;
  double penalty_growth = 10.0;
  int inner_steps = 200;
  std::uint64_t seed = 0;
};

/// Default margins: half of each violated residual, the band for satisfied
/// constraints, and a compact margin slightly above the compact residual.
RealVector default_margins(const LagrangianProblem& L, const ComplexVector& t_star,
                           double scale, double cert_tol = kDefaultCertTol);

/// Upper edge |v_p| - delta_p of the band each constraint must reach (for the
/// compact constraint: the one-sided ceiling v_dot - delta_dot).
RealVector restore_targets(const LagrangianProblem& L, const ComplexVector& t_star,
                           const RealVector& margins);

/// Approximately solves max 2Re(t_d^dagger s_obj) - a_obj |t_d|^2 subject to
/// |f_p(t* + t_d)| <= |v_p| - delta_p and f_dot(t* + t_d) <= v_dot - delta_dot
/// by quadratic-penalty continuation with Gauss-Newton inner steps. The
/// returned point is verified against the inequalities; throws RestoreFailure.
ComplexVector feasibility_restore(const LagrangianProblem& L, const ComplexVector& t_star,
                                  double a_obj, const RealVector& margins,
                                  const RestoreConfig& cfg = {});

struct SourceModification {
  LagrangianProblem problem;
  ComplexVector delta_s;  // change of the objective's linear part
};

/// Objective linear part s_obj + A_phi t_delta, which moves the maximizer at
/// phi_last to t* + t_delta; constraints untouched.
SourceModification modify_source(const LagrangianProblem& L, const RealVector& phi_last,
                                  const ComplexVector& t_delta);

/// Adds f_mod(t) <= bound as the inequality bound - f_mod(t) >= 0 with a
/// sign-constrained multiplier. An infinite bound leaves L unchanged.
LagrangianProblem bound_feedback(const LagrangianProblem& original,
                                 const QuadraticForm& modified_obj, double modified_bound);

struct RefinementConfig {
  SolverConfig solver;
  double cert_tol = kDefaultCertTol;
  int max_restarts = 10;
  double a_obj = 1.0;
  bool single_shot = false;     // zero margins: one direct push toward feasibility
  bool hybrid_alpha = false;    // bisect the modification magnitude
  int alpha_steps = 20;
  RestoreConfig restore;
};

struct RefinementStep {
  ComplexVector source_modification;  // added to s_obj at this restart (empty for the first solve)
  double alpha = 1.0;
  double dual_value = 0.0;
  double max_violation = 0.0;
  Termination termination = Termination::GradientTolerance;
  int solver_iterations = 0;
};

struct RefinementTrace {
  std::vector<RefinementStep> iterations;
  Certificate final;
  QuadraticForm final_objective = QuadraticForm::zero(1);
  DualSolution final_solution;
  bool restart_cap_reached = false;
  bool progress_stalled = false;
};

/// minimize / certify / restore / modify until StrongDual or the restart cap.
RefinementTrace run_restart_loop(const LagrangianProblem& L, const RefinementConfig& cfg);

}  // namespace duality_bounds
