#pragma once

#include <span>
#include <utility>
#include <vector>

#include "duality_bounds/linalg.hpp"

namespace duality_bounds {

/// f(t) = 2 Re(t^dagger s) - t^dagger A t + v with A Hermitian.
///
/// The quadratic part is symmetrized on construction. Inputs whose relative
/// asymmetry exceeds 1e-8 are rejected with ErrorCode::NotHermitian; smaller
/// asymmetry is treated as roundoff.
class QuadraticForm {
 public:
  QuadraticForm(ComplexVector s, ComplexMatrix a, double v = 0.0);

  /// The zero form on C^dim.
  static QuadraticForm zero(Eigen::Index dim);

  Eigen::Index dim() const { return s_.size(); }
  const ComplexVector& s() const { return s_; }
  const ComplexMatrix& a() const { return a_; }
  double v() const { return v_; }

  double operator()(const ComplexVector& t) const;

  QuadraticForm scaled(double c) const;
  QuadraticForm operator-() const { return scaled(-1.0); }

 private:
  ComplexVector s_;
  ComplexMatrix a_;
  double v_;
};

double eval_form(const QuadraticForm& f, const ComplexVector& t);

struct HermitianSplit {
  ComplexMatrix hermitian;
  ComplexMatrix skew;
};

/// M = M^h + M^s with M^h = (M + M^dagger)/2 and M^s = (M - M^dagger)/2.
HermitianSplit hermitian_split(const ComplexMatrix& m);

/// (M + M^dagger)/2.
ComplexMatrix hermitian_part(const ComplexMatrix& m);

enum class Definiteness { PositiveDefiniteEps, PositiveSemidefiniteEps, Below };

/// Classifies lambda_min(A) against eps with tolerance 1e-10 * ||A||_O.
Definiteness definiteness(const ComplexMatrix& a, double eps);

/// sum_i coeffs[i] * forms[i], componentwise on (s, A, v).
QuadraticForm combine_forms(std::span<const double> coeffs,
                            std::span<const QuadraticForm> forms);

struct HermitianSolve {
  ComplexVector x;
  double residual = 0.0;  // ||A x - b||
  double lambda_min = 0.0;
  bool pseudo_inverse_used = false;
};

/// Least-squares solve of A x = b for Hermitian positive semidefinite A.
/// Eigen-directions with |lambda| <= cutoff * lambda_max are treated as null
/// space (pseudo-inverse convention: the returned x has no component there).
/// Throws IndefiniteMatrix when lambda_min(A) < -1e-10 ||A||_O.
HermitianSolve solve_hermitian(const ComplexMatrix& a, const ComplexVector& b,
                               double cutoff = 1e-12);

}  // namespace duality_bounds
