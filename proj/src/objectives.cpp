#include "duality_bounds/objectives.hpp"

#include <random>

#include "duality_bounds/errors.hpp"

namespace duality_bounds {

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::Zero: return "zero";
    case ObjectiveKind::Extinction: return "extinction";
    case ObjectiveKind::Absorption: return "absorption";
    case ObjectiveKind::Scattering: return "scattering";
    case ObjectiveKind::CompactBoundary: return "compact-boundary";
  }
  return "unknown";
}

ObjectiveKind objective_kind_from_string(std::string_view name) {
  for (auto kind : {ObjectiveKind::Zero, ObjectiveKind::Extinction,
                    ObjectiveKind::Absorption, ObjectiveKind::Scattering,
                    ObjectiveKind::CompactBoundary}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::InvalidInput, "unknown objective '" + std::string(name) + "'");
}

QuadraticForm make_objective(const ScatteringProblem& p, ObjectiveKind kind,
                             double strength, std::uint64_t seed) {
  const Eigen::Index n = p.dim();
  const Complex i(0.0, 1.0);
  switch (kind) {
    case ObjectiveKind::Zero:
      return QuadraticForm::zero(n);
    case ObjectiveKind::Extinction:
      return QuadraticForm(strength * i * p.s() / 2.0, ComplexMatrix::Zero(n, n));
    case ObjectiveKind::Absorption:
      return QuadraticForm(ComplexVector::Zero(n),
                           -strength * hermitian_part(i * p.Vinv()));
    case ObjectiveKind::Scattering:
      return QuadraticForm(ComplexVector::Zero(n), strength * hermitian_part(i * p.G()));
    case ObjectiveKind::CompactBoundary: {
      if (n < 2) {
        throw Error(ErrorCode::InvalidInput,
                    "compact-boundary objective needs dimension >= 2");
      }
      // In coordinates x = L^dagger t with A_dot = L L^dagger the resistive
      // constraint is the sphere |x - z| = |z|, z = L^{-1} s_dot. A rank-one
      // objective along u orthogonal to z leaves the Lagrangian maximizer at
      // the sphere centre for every admissible multiplier.
      const ComplexMatrix a_dot = hermitian_part(i * (p.Vinv() - p.G()));
      const ComplexVector s_dot = i * p.s() / 2.0;
      Eigen::LLT<ComplexMatrix> llt(a_dot);
      const ComplexMatrix l = llt.matrixL();
      const ComplexVector z = llt.matrixL().solve(s_dot);
      std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
      std::normal_distribution<double> normal(0.0, 1.0);
      ComplexVector u(n);
      for (Eigen::Index k = 0; k < n; ++k) u(k) = Complex(normal(rng), normal(rng));
      if (z.norm() > 0.0) u -= z * (z.dot(u) / z.squaredNorm());
      u /= u.norm();
      const ComplexVector w = l * u;
      return QuadraticForm(ComplexVector::Zero(n), -strength * (w * w.adjoint()));
    }
  }
  throw Error(ErrorCode::InvalidInput, "unhandled objective kind");
}

}  // namespace duality_bounds
