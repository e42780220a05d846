#include "duality_bounds/quadratic_form.hpp"

#include <cmath>
#include <sstream>

#include "duality_bounds/errors.hpp"

namespace duality_bounds {

QuadraticForm::QuadraticForm(ComplexVector s, ComplexMatrix a, double v)
    : s_(std::move(s)), a_(std::move(a)), v_(v) {
  if (a_.rows() != a_.cols() || a_.rows() != s_.size()) {
    std::ostringstream msg;
    msg << "quadratic form with s of length " << s_.size() << " and A of shape "
        << a_.rows() << "x" << a_.cols();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  if (!s_.allFinite() || !a_.allFinite() || !std::isfinite(v_)) {
    throw Error(ErrorCode::InvalidInput, "quadratic form has non-finite entries");
  }
  const double asym = hermitian_asymmetry(a_);
  if (asym > kHermitianRejectTolerance) {
    std::ostringstream msg;
    msg << "quadratic part has relative asymmetry " << asym;
    throw Error(ErrorCode::NotHermitian, msg.str());
  }
  a_ = hermitian_part(a_);
}

QuadraticForm QuadraticForm::zero(Eigen::Index dim) {
  return QuadraticForm(ComplexVector::Zero(dim), ComplexMatrix::Zero(dim, dim), 0.0);
}

double QuadraticForm::operator()(const ComplexVector& t) const {
  if (t.size() != dim()) {
    throw Error(ErrorCode::DimensionMismatch, "evaluation point has wrong dimension");
  }
  const Complex linear = t.dot(s_);  // t^dagger s
  const Complex quad = t.dot(a_ * t);
  return 2.0 * linear.real() - quad.real() + v_;
}

QuadraticForm QuadraticForm::scaled(double c) const {
  return QuadraticForm(c * s_, c * a_, c * v_);
}

double eval_form(const QuadraticForm& f, const ComplexVector& t) { return f(t); }

HermitianSplit hermitian_split(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "hermitian_split needs a square matrix");
  }
  const ComplexMatrix adj = m.adjoint();
  ComplexMatrix h = 0.5 * (m + adj);
  // Skew part taken as the exact remainder so that h + s reproduces m.
  ComplexMatrix s = m - h;
  return {std::move(h), std::move(s)};
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

Definiteness definiteness(const ComplexMatrix& a, double eps) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "definiteness needs a square matrix");
  }
  if (hermitian_asymmetry(a) > kHermitianRejectTolerance) {
    throw Error(ErrorCode::NotHermitian, "definiteness test on a non-Hermitian matrix");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a),
                                                  Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  const double tol = kEigenToleranceFactor * norm;
  const double diff = ev(0) - eps;
  if (diff > tol) return Definiteness::PositiveDefiniteEps;
  if (diff >= -tol) return Definiteness::PositiveSemidefiniteEps;
  return Definiteness::Below;
}

QuadraticForm combine_forms(std::span<const double> coeffs,
                            std::span<const QuadraticForm> forms) {
  if (coeffs.size() != forms.size()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient count differs from form count");
  }
  if (forms.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "cannot combine an empty list of forms");
  }
  const Eigen::Index dim = forms.front().dim();
  ComplexVector s = ComplexVector::Zero(dim);
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  double v = 0.0;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    if (forms[i].dim() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "forms of different dimension");
    }
    s += coeffs[i] * forms[i].s();
    a += coeffs[i] * forms[i].a();
    v += coeffs[i] * forms[i].v();
  }
  return QuadraticForm(std::move(s), std::move(a), v);
}

HermitianSolve solve_hermitian(const ComplexMatrix& a, const ComplexVector& b,
                               double cutoff) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "solve_hermitian shape mismatch");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a));
  const RealVector& ev = es.eigenvalues();
  const ComplexMatrix& q = es.eigenvectors();
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  if (ev(0) < -kEigenToleranceFactor * norm) {
    throw Error(ErrorCode::IndefiniteMatrix, "solve_hermitian on an indefinite matrix");
  }
  const double threshold = cutoff * ev(ev.size() - 1);
  ComplexVector coeffs = q.adjoint() * b;
  HermitianSolve out;
  out.lambda_min = ev(0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) <= threshold) {
      coeffs(i) = 0.0;
      out.pseudo_inverse_used = true;
    } else {
      coeffs(i) /= ev(i);
    }
  }
  out.x = q * coeffs;
  out.residual = (a * out.x - b).norm();
  return out;
}

}  // namespace duality_bounds
