#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "duality_bounds/quadratic_form.hpp"
#include "duality_bounds/scattering.hpp"

namespace duality_bounds {

enum class ConstraintKind {
  Equality,      // form(t) = 0
  InequalityLE,  // form(t) >= 0; carries a sign-constrained multiplier
};

struct Constraint {
  QuadraticForm form;
  ConstraintKind kind = ConstraintKind::Equality;
  std::string label;
};

/// Ordered constraints with exactly one distinguished compact (resistive
/// power) member. Indices are stable so multiplier vectors line up with them.
class ConstraintSet {
 public:
  ConstraintSet(std::vector<Constraint> constraints, std::size_t compact_index);

  std::size_t size() const { return constraints_.size(); }
  Eigen::Index dim() const { return constraints_.front().form.dim(); }
  const Constraint& operator[](std::size_t k) const { return constraints_.at(k); }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  std::size_t compact_index() const { return compact_index_; }
  const Constraint& compact() const { return constraints_[compact_index_]; }

  /// Copy with `c` appended (compact index unchanged).
  ConstraintSet with(Constraint c) const;

 private:
  std::vector<Constraint> constraints_;
  std::size_t compact_index_;
};

/// f_dot: s-part i s/2, A-part (iU)^h, v = 0.
Constraint compact_constraint(const ScatteringProblem& p);

/// Re(t^dagger P s) - t^dagger (P U)^h t = 0 for block-diagonal P.
Constraint gen_constraint_simple(const ScatteringProblem& p, const ComplexMatrix& P);

/// Background-shifted schema relative to design b. The caller's P is used
/// as given (any potential-dependent rescaling already folded in):
///   s-part = (Wb^{-dagger} P Vc + Wc^{-dagger} P^dagger Vb) s / 2
///   A-part = (Wb^{-dagger} P Wc^{-1})^h
Constraint gen_constraint_background(const ScatteringProblem& p, const ComplexMatrix& P,
                                     const Design& b);

/// Rescales a constraint so that ||A||_O = 1 (zero forms are returned as is).
Constraint normalize_constraint(const Constraint& c);

/// f_dot plus, per block j, the pair P = I|d_j and P = i I|d_j from the
/// simple schema and from the background schema for every requested
/// background. Non-compact members are normalized and near-duplicates
/// (distance < 1e-12 up to sign) dropped.
ConstraintSet default_family(const ScatteringProblem& p,
                             const std::vector<Design>& backgrounds);

struct ValidityReport {
  bool pass = true;
  double max_normalized = 0.0;
  double tolerance = 0.0;
  std::size_t designs_checked = 0;
  std::optional<std::size_t> worst_constraint;
  std::optional<Design> worst_design;
};

/// Max over constraints k and designs rho of |f_k(t_rho)| normalized by
/// ||s_k|| ||t|| + ||A_k||_O ||t||^2.
ValidityReport validate_on_designs(const ConstraintSet& cs, const ScatteringProblem& p,
                                   double tol);

/// Scale used to normalize a single constraint value at t.
double constraint_scale(const QuadraticForm& f, const ComplexVector& t);

}  // namespace duality_bounds
