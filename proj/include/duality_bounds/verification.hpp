#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "duality_bounds/dual_solver.hpp"
#include "duality_bounds/scattering.hpp"

namespace duality_bounds {

struct OracleResult {
  double value = 0.0;
  Design argmax;
  ComplexVector t;
};

/// Exhaustive primal maximum over all 2^J designs; ties go to the
/// lexicographically smallest design. Throws EnumerationCap for J > 20.
OracleResult oracle_bound(const ScatteringProblem& p, const QuadraticForm& f_obj);

/// |D(default_start)| + 1, the scale used by every relative tolerance.
double dual_scale(const LagrangianProblem& L);

struct PrimalSample {
  ComplexVector t;
  bool in_C = false;
  RealVector constraint_residuals;
};

PrimalSample primal_sample(const LagrangianProblem& L, const ComplexVector& t);

/// Uniformly random unit direction, inequality components made nonnegative,
/// then moved toward e_dot until sum_k psi_k A_k >= eps (objective excluded).
RealVector sample_combination(const LagrangianProblem& L, std::mt19937_64& rng);

/// Random point of Phi_eps: a Gaussian multiplier shifted along e_dot.
RealVector sample_phi_eps(const LagrangianProblem& L, std::mt19937_64& rng);

enum class QVerdict { NotInQ, NoViolationFound };
std::string_view to_string(QVerdict v);

struct QMembership {
  QVerdict verdict = QVerdict::NoViolationFound;
  std::optional<RealVector> certificate;  // psi with A_psi >= eps and f_psi(t) < 0
  double best_combination_value = std::numeric_limits<double>::infinity();
};

/// Searches unit combinations psi with A_psi >= eps for f_psi(t) < -1e-10 scale.
/// Certificates are eigen-verified; NoViolationFound proves nothing.
QMembership q_membership(const LagrangianProblem& L, const ComplexVector& t, int budget,
                         std::uint64_t seed);

/// Upper bound on inf over Phi_eps of L(phi, t) for t in C; -infinity when a
/// divergent ray is found. Feasible t (every residual within 1e-7 scale)
/// returns f_obj(t).
double sampled_F(const LagrangianProblem& L, const ComplexVector& t, int budget,
                 std::uint64_t seed);

struct BoundMargin {
  std::size_t constraint = 0;
  double value = 0.0;  // |f_k(t)|
  double bound = 0.0;  // 2 delta ||A_k|| / eps
  bool pass = true;
};

struct ViolationBoundReport {
  bool pass = true;
  double f_d_value = 0.0;
  double delta = 0.0;
  std::vector<BoundMargin> margins;
};

/// Checks |f_k(t)| <= 2 delta ||A_k||_O / eps for every constraint, given an
/// eps-definite combination f_d with 0 <= f_d(t) <= delta. Throws
/// PreconditionViolation when f_d does not meet those requirements.
ViolationBoundReport violation_bound_check(const LagrangianProblem& L, const ComplexVector& t,
                                           const QuadraticForm& f_d, double delta);

struct CombinationReport {
  bool pass = true;
  int samples = 0;
  double min_value = std::numeric_limits<double>::infinity();  // min f_psi(t) / scale
  double tolerance = 0.0;
};

/// f_psi(t) >= -tol * scale for sampled unit psi with A_psi >= 0.
CombinationReport psd_combination_check(const LagrangianProblem& L, const ComplexVector& t,
                                        int n_samples, std::uint64_t seed, double scale,
                                        double tol = 1e-8);

struct FdReport {
  bool pass = true;
  int points = 0;
  int excluded = 0;  // lifted or boundary-adjacent candidates
  double max_grad_rel_err = 0.0;
  double max_hess_rel_err = 0.0;
  double min_hess_eig_rel = 0.0;  // lambda_min(H) / ||H||
};

/// Central finite differences of eval_dual (step 1e-5) against dual_gradient
/// and dual_hessian at n_points random interior multipliers.
FdReport fd_check_suite(const LagrangianProblem& L, int n_points, std::uint64_t seed);

struct MinimaxReport {
  bool pass = true;
  double dual_value = 0.0;
  double scale = 1.0;
  double max_sampled_F = -std::numeric_limits<double>::infinity();
  double sandwich_gap = 0.0;  // dual_value - max_sampled_F
  int feasible_points = 0;
  bool includes_dual_point = false;
  int phi_samples = 0;
  double worst_lagrangian_slack = std::numeric_limits<double>::infinity();
  bool upper_ok = true;
  bool lower_ok = true;
};

/// One-sided minimax checks over the enumerated designs (plus the dual
/// maximizer when it certifies): max sampled_F <= dual minimum, and
/// L(phi, t) >= f_obj(t) for sampled phi in Phi_eps and every design.
MinimaxReport minimax_cross_check(const LagrangianProblem& L, const ScatteringProblem& p,
                                  int budget, std::uint64_t seed);

}  // namespace duality_bounds
