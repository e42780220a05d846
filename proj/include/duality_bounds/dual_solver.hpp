#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "duality_bounds/constraints.hpp"
#include "duality_bounds/quadratic_form.hpp"

namespace duality_bounds {

/// Normalized feasibility tolerance of the compact-constraint lift.
inline constexpr double kLiftTolerance = 1e-10;

/// max over t of f_obj + sum_k phi_k f_k, restricted to C = {f_dot(t) >= 0}
/// and to multipliers with A_phi >= eps I.
class LagrangianProblem {
 public:
  LagrangianProblem(QuadraticForm objective, ConstraintSet constraints, double eps);

  /// eps = eps_factor * lambda_min(A_dot).
  static LagrangianProblem with_eps_factor(QuadraticForm objective, ConstraintSet constraints,
                                           double eps_factor = 1e-6);

  const QuadraticForm& objective() const { return objective_; }
  const ConstraintSet& constraints() const { return constraints_; }
  double eps() const { return eps_; }
  Eigen::Index dim() const { return objective_.dim(); }
  std::size_t num_multipliers() const { return constraints_.size(); }
  std::size_t compact_index() const { return constraints_.compact_index(); }

  /// Lower-triangular L with A_dot = L L^dagger.
  const ComplexMatrix& compact_factor() const { return compact_l_; }

  ComplexVector s_phi(const RealVector& phi) const;
  ComplexMatrix a_phi(const RealVector& phi) const;
  double v_phi(const RealVector& phi) const;
  /// f_obj + sum_k phi_k f_k.
  QuadraticForm lagrangian(const RealVector& phi) const;
  /// sum_k psi_k f_k (objective excluded).
  QuadraticForm combination(const RealVector& psi) const;

  LagrangianProblem with_objective(QuadraticForm objective) const;
  LagrangianProblem with_constraints(ConstraintSet constraints) const;

 private:
  QuadraticForm objective_;
  ConstraintSet constraints_;
  double eps_;
  ComplexMatrix compact_l_;
};

enum class DualStatus { Interior, OnEpsBoundary, Lifted };
std::string_view to_string(DualStatus status);

struct DualState {
  RealVector phi;
  double lift_alpha = 0.0;
  ComplexVector t_star;
  double value = 0.0;
  RealVector grad;
  double lambda_min = 0.0;  // of A_phi - eps I
  DualStatus status = DualStatus::Interior;
};

/// D(phi) = max over C of the Lagrangian, lifting the compact multiplier when
/// the unconstrained maximizer leaves C. Throws MultiplierOutsidePhiEps.
DualState eval_dual(const LagrangianProblem& L, const RealVector& phi);

struct LiftResult {
  double alpha = 0.0;
  ComplexVector t_star;
  double lower = 0.0;         // bracket endpoint with f_dot < 0
  double upper = 0.0;         // bracket endpoint with f_dot >= 0 (returned alpha)
  double f_lower = 0.0;
  double f_upper = 0.0;
  int bisection_steps = 0;
};

/// Smallest alpha >= 0 for which the maximizer of the Lagrangian at
/// phi + alpha e_dot satisfies |f_dot| <= kLiftTolerance (normalized).
/// Returns alpha = 0 when no lift is needed.
LiftResult lift_phi_dot(const LagrangianProblem& L, const RealVector& phi);

/// Component k is f_k(t*).
RealVector dual_gradient(const DualState& state, const LagrangianProblem& L);

/// H_kj = 2 Re[(s_k - A_k t*)^dagger A_phi^{-1} (s_j - A_j t*)]. Throws
/// BoundaryState for lifted or eps-boundary states.
RealMatrix dual_hessian(const DualState& state, const LagrangianProblem& L);

/// Same formula without the state checks; valid wherever no lift is active.
RealMatrix dual_hessian_unchecked(const DualState& state, const LagrangianProblem& L);

struct SolverConfig {
  double eps_factor = 1e-6;
  double grad_tol = 1e-8;
  int max_iters = 500;
  std::uint64_t seed = 0;
};

enum class Termination { GradientTolerance, EpsBoundary, Stalled };
std::string_view to_string(Termination t);

struct DualSolution {
  DualState state;
  Termination termination = Termination::GradientTolerance;
  int iterations = 0;
  double scale = 1.0;                   // |D(phi0)| + 1
  double projected_grad_norm = 0.0;
  std::vector<double> values;           // D at every accepted iterate
};

/// phi0 = c e_dot with A_phi0 comfortably inside Phi_eps.
RealVector default_start(const LagrangianProblem& L);

/// Projected damped Newton descent of D over Phi_eps. Throws IterationLimit and
/// CoercivityFailure.
DualSolution minimize_dual(const LagrangianProblem& L, const SolverConfig& cfg,
                           std::optional<RealVector> start = std::nullopt);

struct CoercivityResult {
  bool pass = true;
  RealVector fail_direction;  // set when !pass
  double min_value = 0.0;     // smallest sampled max over C of f_psi
  int samples = 0;
};

/// Samples unit psi with A_psi >= 0 and checks max over C of sum psi_k f_k > delta.
CoercivityResult coercivity_check(const LagrangianProblem& L, double delta, int n_samples,
                                  std::uint64_t seed);

/// Maximum over C of a quadratic form whose quadratic part is only positive
/// semidefinite. Null directions of A are resolved in favour of C.
struct ConstrainedMax {
  double value = 0.0;
  double alpha = 0.0;
  ComplexVector t;
};
ConstrainedMax maximize_over_compact(const LagrangianProblem& L, const QuadraticForm& f);

/// Smallest sigma >= 0 with A + sigma A_dot >= eps I.
double compact_shift(const LagrangianProblem& L, const ComplexMatrix& a);

/// Largest tau in [0, tau_cap] with A + tau B >= eps I, given A >= eps I.
double max_feasible_step(const LagrangianProblem& L, const ComplexMatrix& a,
                         const ComplexMatrix& b, double tau_cap);

}  // namespace duality_bounds
