#include "duality_bounds/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "duality_bounds/errors.hpp"

namespace duality_bounds {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::IndefiniteMatrix: return "IndefiniteMatrix";
    case ErrorCode::PassivityViolation: return "PassivityViolation";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::InvalidDesign: return "InvalidDesign";
    case ErrorCode::SingularDesignOperator: return "SingularDesignOperator";
    case ErrorCode::EnumerationCap: return "EnumerationCap";
    case ErrorCode::NotBlockDiagonal: return "NotBlockDiagonal";
    case ErrorCode::MultiplierOutsidePhiEps: return "MultiplierOutsidePhiEps";
    case ErrorCode::LiftBracketFailure: return "LiftBracketFailure";
    case ErrorCode::BoundaryState: return "BoundaryState";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::CoercivityFailure: return "CoercivityFailure";
    case ErrorCode::OutsideCompactSet: return "OutsideCompactSet";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::RestoreFailure: return "RestoreFailure";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

double hermitian_operator_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double operator_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

double lambda_min(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double hermitian_asymmetry(const ComplexMatrix& a) {
  const double norm = a.norm();
  if (norm == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / norm;
}

bool all_finite(const ComplexMatrix& a) { return a.allFinite(); }
bool all_finite(const ComplexVector& v) { return v.allFinite(); }

}  // namespace duality_bounds
