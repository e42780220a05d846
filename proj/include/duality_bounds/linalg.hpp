#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace duality_bounds {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Operator (spectral) norm of a Hermitian matrix: largest |eigenvalue|.
double hermitian_operator_norm(const ComplexMatrix& a);

/// Operator norm of a general square matrix (largest singular value).
double operator_norm(const ComplexMatrix& a);

/// Smallest eigenvalue of a Hermitian matrix.
double lambda_min(const ComplexMatrix& a);

/// ||a - a^dagger||_F / max(||a||_F, tiny).
double hermitian_asymmetry(const ComplexMatrix& a);

bool all_finite(const ComplexMatrix& a);
bool all_finite(const ComplexVector& v);

/// Eigenvalue tolerance used by every definiteness decision: 1e-10 * ||A||_O.
inline constexpr double kEigenToleranceFactor = 1e-10;

/// Asymmetry tolerated (and removed by symmetrization) when a matrix is
/// accepted as Hermitian.
inline constexpr double kHermitianRejectTolerance = 1e-8;

}  // namespace duality_bounds
