#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <random>

#include "duality_bounds/constraints.hpp"
#include "duality_bounds/dual_solver.hpp"
#include "duality_bounds/errors.hpp"
#include "duality_bounds/quadratic_form.hpp"
#include "duality_bounds/scattering.hpp"

namespace testing {

using namespace duality_bounds;

inline std::optional<ErrorCode> error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// ---- generators -------------------------------------------------------------

inline ComplexVector random_vector(Eigen::Index n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = {g(rng), g(rng)};
  return v;
}

inline ComplexMatrix random_matrix(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

inline ComplexMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  ComplexMatrix m = random_matrix(n, rng);
  return (m + m.adjoint()) / 2.0;
}

// Hermitian with every eigenvalue in [lo, hi].
inline ComplexMatrix random_spd(Eigen::Index n, std::mt19937_64& rng, double lo = 0.5,
                                double hi = 2.0) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(n, rng));
  ComplexMatrix q = qr.householderQ();
  std::uniform_real_distribution<double> u(lo, hi);
  RealVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = u(rng);
  ComplexMatrix a = q * d.cast<Complex>().asDiagonal() * q.adjoint();
  return (a + a.adjoint()) / 2.0;
}

inline QuadraticForm random_form(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  return QuadraticForm(random_vector(n, rng), random_hermitian(n, rng), g(rng));
}

inline Design random_design(int blocks, std::mt19937_64& rng) {
  std::vector<std::uint8_t> bits(blocks);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
  return Design(bits);
}

// ---- oracles ----------------------------------------------------------------

// Elementwise sum, no Eigen products.
inline double naive_eval(const ComplexVector& s, const ComplexMatrix& a, double v,
                         const ComplexVector& t) {
  double lin = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) lin += 2.0 * std::real(std::conj(t(i)) * s(i));
  Complex quad = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i)
    for (Eigen::Index j = 0; j < t.size(); ++j) quad += std::conj(t(i)) * a(i, j) * t(j);
  return lin - quad.real() + v;
}

// Dense full-dimension solve: (V^{-1} - G) restricted by masking rows and
// columns of inactive blocks with identity, then FullPivLU.
inline ComplexVector dense_design_solve(const ScatteringProblem& p, const Design& rho) {
  const Eigen::Index n = p.dim();
  ComplexMatrix m = ComplexMatrix::Identity(n, n);
  ComplexVector rhs = ComplexVector::Zero(n);
  std::vector<bool> on(n, false);
  for (Eigen::Index i = 0; i < n; ++i) on[i] = rho[p.partition().block_of(i)];
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!on[i]) continue;
    rhs(i) = p.s()(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!on[j]) continue;
      Complex vinv = i == j ? 1.0 / p.v_diagonal()(i) : Complex(0.0);
      m(i, j) = vinv - p.G()(i, j);
    }
  }
  return m.fullPivLu().solve(rhs);
}

// Scalar problems: f(t) = 2 Re(conj(t) s) - a |t|^2 + v with complex t.
struct Scalar {
  Complex s;
  double a;
  double v;
  double operator()(Complex t) const {
    return 2.0 * std::real(std::conj(t) * s) - a * std::norm(t) + v;
  }
};

// max of g over {c(t) >= 0} where g has a > 0 and c is the compact disk
// constraint (a_c > 0). Interior check plus a dense scan of the boundary
// circle refined by golden-section search.
inline double scalar_max_over_disk(const Scalar& g, const Scalar& c) {
  const Complex t0 = g.s / g.a;
  if (c(t0) >= 0.0) return g(t0);
  const Complex center = c.s / c.a;
  const double radius = std::sqrt(std::norm(c.s) / (c.a * c.a) + c.v / c.a);
  auto h = [&](double th) { return g(center + radius * std::polar(1.0, th)); };
  constexpr int kGrid = 20000;
  const double two_pi = 2.0 * std::acos(-1.0);
  int best = 0;
  double best_v = h(0.0);
  for (int k = 1; k < kGrid; ++k) {
    double v = h(two_pi * k / kGrid);
    if (v > best_v) best_v = v, best = k;
  }
  double lo = two_pi * (best - 1) / kGrid, hi = two_pi * (best + 1) / kGrid;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    if (h(x1) < h(x2)) lo = x1; else hi = x2;
  }
  return std::max(best_v, h(0.5 * (lo + hi)));
}

// Smallest alpha >= 0 with c(t(alpha)) >= 0, t(alpha) the maximizer of
// g + alpha c. Uniform scan for the first sign change then bisection.
inline double scalar_lift_root(const Scalar& g, const Scalar& c, double alpha_max) {
  auto fc = [&](double al) { return c((g.s + al * c.s) / (g.a + al * c.a)); };
  if (fc(0.0) >= 0.0) return 0.0;
  constexpr int kScan = 100000;
  double prev = 0.0;
  for (int k = 1; k <= kScan; ++k) {
    double al = alpha_max * k / kScan;
    if (fc(al) >= 0.0) {
      double lo = prev, hi = al;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (fc(mid) >= 0.0 ? hi : lo) = mid;
      }
      return hi;
    }
    prev = al;
  }
  return -1.0;
}

}  // namespace testing
