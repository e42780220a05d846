#include "duality_bounds/dual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "duality_bounds/errors.hpp"

namespace duality_bounds {

namespace {

constexpr double kNullCutoff = 1e-12;
constexpr double kLiftTarget = 1e-11;   // internal target, below kLiftTolerance
constexpr double kBracketCap = 1152921504606846976.0;  // 2^60
constexpr double kArmijo = 1e-4;
constexpr double kActiveFactor = 1e-8;
constexpr double kNearActiveFactor = 1e-3;
constexpr double kValueNoise = 64.0 * 2.220446049250313e-16;
constexpr std::size_t kStagnationWindow = 10;
constexpr double kStagnationDecrease = 1e-10;

// Quadratic problem max 2Re(t^dagger s) - t^dagger A t over C in the
// coordinates x = L^dagger t with A_dot = L L^dagger. C becomes the ball
// |x - z| <= |z| and A becomes diag(lambda) in the basis q.
struct Whitened {
  RealVector lambda;
  ComplexMatrix q;
  ComplexVector y;  // q^dagger L^{-1} s
  ComplexVector z;  // q^dagger L^{-1} s_dot
  double z_norm2 = 0.0;
  double cutoff = 0.0;
};

Whitened whiten(const LagrangianProblem& L, const ComplexMatrix& a, const ComplexVector& s) {
  const ComplexMatrix& l = L.compact_factor();
  const auto tri = l.triangularView<Eigen::Lower>();
  const ComplexMatrix x = tri.solve(a);
  ComplexMatrix m = tri.solve(ComplexMatrix(x.adjoint()));
  m = hermitian_part(m);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  Whitened w;
  w.lambda = es.eigenvalues();
  w.q = es.eigenvectors();
  const double lmax = std::max(std::abs(w.lambda(w.lambda.size() - 1)),
                               std::abs(w.lambda(0)));
  if (w.lambda(0) < -kEigenToleranceFactor * std::max(lmax, 1e-300) * 10.0) {
    throw Error(ErrorCode::IndefiniteMatrix, "quadratic part is not positive semidefinite");
  }
  w.cutoff = kNullCutoff * std::max(lmax, 1e-300);
  for (Eigen::Index i = 0; i < w.lambda.size(); ++i) w.lambda(i) = std::max(w.lambda(i), 0.0);
  w.y = w.q.adjoint() * tri.solve(s);
  w.z = w.q.adjoint() * tri.solve(L.constraints().compact().form.s());
  w.z_norm2 = w.z.squaredNorm();
  return w;
}

bool is_null(const Whitened& w, Eigen::Index i) { return w.lambda(i) <= w.cutoff; }

// f_dot(t(alpha)) = |z|^2 - sum |y_i - lambda_i z_i|^2 / (lambda_i + alpha)^2.
double secular(const Whitened& w, double alpha) {
  const double scale_y = w.y.norm() + std::sqrt(w.z_norm2) * w.lambda.maxCoeff();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < w.lambda.size(); ++i) {
    const Complex num = w.y(i) - w.lambda(i) * w.z(i);
    const double denom = w.lambda(i) + alpha;
    if (is_null(w, i) && alpha == 0.0) {
      if (std::abs(num) > kNullCutoff * std::max(scale_y, 1e-300)) {
        return -std::numeric_limits<double>::infinity();
      }
      continue;  // null direction placed at the ball centre component
    }
    sum += std::norm(num) / (denom * denom);
  }
  return w.z_norm2 - sum;
}

ComplexVector point(const LagrangianProblem& L, const Whitened& w, double alpha) {
  ComplexVector xh(w.lambda.size());
  for (Eigen::Index i = 0; i < w.lambda.size(); ++i) {
    if (is_null(w, i) && alpha == 0.0) {
      xh(i) = w.z(i);
    } else {
      xh(i) = (w.y(i) + alpha * w.z(i)) / (w.lambda(i) + alpha);
    }
  }
  const ComplexVector x = w.q * xh;
  return L.compact_factor().adjoint().triangularView<Eigen::Upper>().solve(x);
}

double normalized_compact(const LagrangianProblem& L, const ComplexVector& t) {
  const QuadraticForm& f = L.constraints().compact().form;
  const double scale = constraint_scale(f, t);
  const double value = f(t);
  return scale > 0.0 ? value / scale : value;
}

struct LiftSearch {
  LiftResult result;
  bool lifted = false;
};

LiftSearch run_lift(const LagrangianProblem& L, const Whitened& w) {
  LiftSearch out;
  const double f0 = secular(w, 0.0);
  if (std::isfinite(f0)) {
    ComplexVector t0 = point(L, w, 0.0);
    if (normalized_compact(L, t0) >= -kLiftTolerance) {
      out.result.t_star = std::move(t0);
      out.result.f_upper = f0;
      return out;
    }
  }
  out.lifted = true;
  LiftResult& r = out.result;
  double lo = 0.0;
  double f_lo = f0;
  double hi = 1.0;
  double f_hi = secular(w, hi);
  while (f_hi < 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    if (hi > kBracketCap) {
      throw Error(ErrorCode::LiftBracketFailure, "no sign change of f_dot below alpha = 2^60");
    }
    f_hi = secular(w, hi);
  }
  ComplexVector t_hi = point(L, w, hi);
  int steps = 0;
  while (steps < 2000) {
    if (std::abs(normalized_compact(L, t_hi)) <= kLiftTarget) break;
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    const double fm = secular(w, mid);
    if (fm < 0.0) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
      f_hi = fm;
      t_hi = point(L, w, hi);
    }
    ++steps;
  }
  r.alpha = hi;
  r.t_star = std::move(t_hi);
  r.lower = lo;
  r.upper = hi;
  r.f_lower = f_lo;
  r.f_upper = f_hi;
  r.bisection_steps = steps;
  return out;
}

void check_sign_constraints(const LagrangianProblem& L, const RealVector& phi) {
  if (static_cast<std::size_t>(phi.size()) != L.num_multipliers()) {
    throw Error(ErrorCode::DimensionMismatch, "multiplier vector has the wrong length");
  }
  for (std::size_t k = 0; k < L.num_multipliers(); ++k) {
    if (L.constraints()[k].kind == ConstraintKind::InequalityLE && phi(k) < 0.0) {
      std::ostringstream msg;
      msg << "inequality multiplier " << k << " is negative (" << phi(k) << ")";
      throw Error(ErrorCode::MultiplierOutsidePhiEps, msg.str());
    }
  }
}

struct Spectrum {
  RealVector values;  // of A_phi - eps I
  ComplexMatrix vectors;
  double a_norm = 0.0;
};

Spectrum shifted_spectrum(const LagrangianProblem& L, const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
  Spectrum sp;
  sp.values = es.eigenvalues().array() - L.eps();
  sp.vectors = es.eigenvectors();
  const auto& ev = es.eigenvalues();
  sp.a_norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return sp;
}

double tol_eig(const Spectrum& sp) { return kEigenToleranceFactor * std::max(sp.a_norm, 1e-300); }

// Lawson-Hanson NNLS for the small systems min |g - N nu|, nu >= 0.
RealVector nnls(const RealMatrix& n, const RealVector& g) {
  const Eigen::Index p = n.cols();
  RealVector nu = RealVector::Zero(p);
  if (p == 0) return nu;
  std::vector<bool> passive(p, false);
  for (int outer = 0; outer < 3 * p + 10; ++outer) {
    const RealVector w = n.transpose() * (g - n * nu);
    Eigen::Index best = -1;
    double best_w = 1e-14 * (g.norm() * n.norm() + 1e-300);
    for (Eigen::Index i = 0; i < p; ++i) {
      if (!passive[i] && w(i) > best_w) {
        best_w = w(i);
        best = i;
      }
    }
    if (best < 0) break;
    passive[best] = true;
    for (int inner = 0; inner < 3 * p + 10; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < p; ++i) if (passive[i]) idx.push_back(i);
      RealMatrix np(n.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t c = 0; c < idx.size(); ++c) np.col(c) = n.col(idx[c]);
      const RealVector zp = np.completeOrthogonalDecomposition().solve(g);
      bool all_pos = true;
      for (Eigen::Index c = 0; c < zp.size(); ++c) all_pos = all_pos && zp(c) > 0.0;
      if (all_pos) {
        nu.setZero();
        for (std::size_t c = 0; c < idx.size(); ++c) nu(idx[c]) = zp(c);
        break;
      }
      double step = 1.0;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        if (zp(c) <= 0.0) {
          const double denom = nu(idx[c]) - zp(c);
          if (denom > 0.0) step = std::min(step, nu(idx[c]) / denom);
        }
      }
      for (std::size_t c = 0; c < idx.size(); ++c) {
        nu(idx[c]) += step * (zp(c) - nu(idx[c]));
        if (nu(idx[c]) <= 1e-300) {
          nu(idx[c]) = 0.0;
          passive[idx[c]] = false;
        }
      }
    }
  }
  return nu;
}

}  // namespace

LagrangianProblem::LagrangianProblem(QuadraticForm objective, ConstraintSet constraints,
                                     double eps)
    : objective_(std::move(objective)), constraints_(std::move(constraints)), eps_(eps) {
  if (objective_.dim() != constraints_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "objective and constraints disagree in dimension");
  }
  if (!(eps_ > 0.0) || !std::isfinite(eps_)) {
    throw Error(ErrorCode::InvalidInput, "eps must be strictly positive");
  }
  if (objective_.v() != 0.0) {
    throw Error(ErrorCode::InvalidInput, "objective must have zero constant part");
  }
  Eigen::LLT<ComplexMatrix> llt(constraints_.compact().form.a());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::PassivityViolation, "compact quadratic part is not positive definite");
  }
  compact_l_ = llt.matrixL();
}

LagrangianProblem LagrangianProblem::with_eps_factor(QuadraticForm objective,
                                                     ConstraintSet constraints,
                                                     double eps_factor) {
  const double lmin = lambda_min(constraints.compact().form.a());
  return LagrangianProblem(std::move(objective), std::move(constraints), eps_factor * lmin);
}

ComplexVector LagrangianProblem::s_phi(const RealVector& phi) const {
  ComplexVector s = objective_.s();
  for (std::size_t k = 0; k < constraints_.size(); ++k) {
    if (phi(k) != 0.0) s += phi(k) * constraints_[k].form.s();
  }
  return s;
}

ComplexMatrix LagrangianProblem::a_phi(const RealVector& phi) const {
  ComplexMatrix a = objective_.a();
  for (std::size_t k = 0; k < constraints_.size(); ++k) {
    if (phi(k) != 0.0) a += phi(k) * constraints_[k].form.a();
  }
  return a;
}

double LagrangianProblem::v_phi(const RealVector& phi) const {
  double v = objective_.v();
  for (std::size_t k = 0; k < constraints_.size(); ++k) v += phi(k) * constraints_[k].form.v();
  return v;
}

QuadraticForm LagrangianProblem::lagrangian(const RealVector& phi) const {
  return QuadraticForm(s_phi(phi), a_phi(phi), v_phi(phi));
}

QuadraticForm LagrangianProblem::combination(const RealVector& psi) const {
  ComplexVector s = ComplexVector::Zero(dim());
  ComplexMatrix a = ComplexMatrix::Zero(dim(), dim());
  double v = 0.0;
  for (std::size_t k = 0; k < constraints_.size(); ++k) {
    s += psi(k) * constraints_[k].form.s();
    a += psi(k) * constraints_[k].form.a();
    v += psi(k) * constraints_[k].form.v();
  }
  return QuadraticForm(std::move(s), std::move(a), v);
}

LagrangianProblem LagrangianProblem::with_objective(QuadraticForm objective) const {
  return LagrangianProblem(std::move(objective), constraints_, eps_);
}

LagrangianProblem LagrangianProblem::with_constraints(ConstraintSet constraints) const {
  return LagrangianProblem(objective_, std::move(constraints), eps_);
}

std::string_view to_string(DualStatus status) {
  switch (status) {
    case DualStatus::Interior: return "interior";
    case DualStatus::OnEpsBoundary: return "eps-boundary";
    case DualStatus::Lifted: return "lifted";
  }
  return "unknown";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::GradientTolerance: return "gradient-tolerance";
    case Termination::EpsBoundary: return "eps-boundary";
    case Termination::Stalled: return "stalled";
  }
  return "unknown";
}

ConstrainedMax maximize_over_compact(const LagrangianProblem& L, const QuadraticForm& f) {
  const Whitened w = whiten(L, f.a(), f.s());
  const LiftSearch lift = run_lift(L, w);
  ConstrainedMax out;
  out.t = lift.result.t_star;
  out.alpha = lift.result.alpha;
  if (lift.lifted) {
    // Dual value of the lifted problem: an upper bound on the constrained max
    // that coincides with it once f_dot(t) = 0.
    const QuadraticForm& fc = L.constraints().compact().form;
    const ComplexVector s = f.s() + out.alpha * fc.s();
    out.value = out.t.dot(s).real() + f.v() + out.alpha * fc.v();
  } else {
    out.value = f(out.t);
  }
  return out;
}

LiftResult lift_phi_dot(const LagrangianProblem& L, const RealVector& phi) {
  check_sign_constraints(L, phi);
  const Whitened w = whiten(L, L.a_phi(phi), L.s_phi(phi));
  return run_lift(L, w).result;
}

DualState eval_dual(const LagrangianProblem& L, const RealVector& phi) {
  check_sign_constraints(L, phi);
  const ComplexMatrix a = L.a_phi(phi);
  const Spectrum sp = shifted_spectrum(L, a);
  if (sp.values(0) < -tol_eig(sp)) {
    std::ostringstream msg;
    msg << "lambda_min(A_phi - eps I) = " << sp.values(0);
    throw Error(ErrorCode::MultiplierOutsidePhiEps, msg.str());
  }
  const ComplexVector s = L.s_phi(phi);
  const Whitened w = whiten(L, a, s);
  const LiftSearch lift = run_lift(L, w);

  DualState st;
  st.phi = phi;
  st.lift_alpha = lift.result.alpha;
  st.t_star = lift.result.t_star;
  st.lambda_min = sp.values(0);
  const QuadraticForm& fc = L.constraints().compact().form;
  if (lift.lifted) {
    const ComplexVector s_l = s + st.lift_alpha * fc.s();
    st.value = st.t_star.dot(s_l).real() + L.v_phi(phi) + st.lift_alpha * fc.v();
  } else {
    st.value = st.t_star.dot(s).real() + L.v_phi(phi);
  }
  st.grad.resize(static_cast<Eigen::Index>(L.num_multipliers()));
  for (std::size_t k = 0; k < L.num_multipliers(); ++k) {
    st.grad(k) = L.constraints()[k].form(st.t_star);
  }
  if (lift.lifted) {
    st.grad(L.compact_index()) = 0.0;
    st.status = DualStatus::Lifted;
  } else if (sp.values(0) <= kActiveFactor * sp.a_norm) {
    st.status = DualStatus::OnEpsBoundary;
  } else {
    st.status = DualStatus::Interior;
  }
  return st;
}

RealVector dual_gradient(const DualState& state, const LagrangianProblem& L) {
  RealVector g(static_cast<Eigen::Index>(L.num_multipliers()));
  for (std::size_t k = 0; k < L.num_multipliers(); ++k) {
    g(k) = L.constraints()[k].form(state.t_star);
  }
  if (state.status == DualStatus::Lifted) g(L.compact_index()) = 0.0;
  return g;
}

RealMatrix dual_hessian_unchecked(const DualState& state, const LagrangianProblem& L) {
  const auto m = static_cast<Eigen::Index>(L.num_multipliers());
  ComplexMatrix r(L.dim(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& f = L.constraints()[k].form;
    r.col(k) = f.s() - f.a() * state.t_star;
  }
  const ComplexMatrix a = L.a_phi(state.phi);
  Eigen::LLT<ComplexMatrix> llt(a);
  ComplexMatrix x;
  if (llt.info() == Eigen::Success) {
    x = llt.solve(r);
  } else {
    x = a.completeOrthogonalDecomposition().solve(r);
  }
  RealMatrix h = 2.0 * (r.adjoint() * x).real();
  return 0.5 * (h + h.transpose());
}

RealMatrix dual_hessian(const DualState& state, const LagrangianProblem& L) {
  if (state.status != DualStatus::Interior) {
    throw Error(ErrorCode::BoundaryState,
                std::string("Hessian requested at a ") + std::string(to_string(state.status)) +
                    " state");
  }
  return dual_hessian_unchecked(state, L);
}

double compact_shift(const LagrangianProblem& L, const ComplexMatrix& a) {
  const ComplexMatrix shifted = a - L.eps() * ComplexMatrix::Identity(L.dim(), L.dim());
  const auto tri = L.compact_factor().triangularView<Eigen::Lower>();
  const ComplexMatrix x = tri.solve(shifted);
  const ComplexMatrix m = hermitian_part(tri.solve(ComplexMatrix(x.adjoint())));
  const double lmin = lambda_min(m);
  if (lmin >= 0.0) return 0.0;
  // Slightly overshoot so the shifted matrix is numerically inside Phi_eps.
  return -lmin * (1.0 + 1e-10) + 1e-14 * hermitian_operator_norm(m);
}

double max_feasible_step(const LagrangianProblem& L, const ComplexMatrix& a,
                         const ComplexMatrix& b, double tau_cap) {
  const ComplexMatrix shifted = a - L.eps() * ComplexMatrix::Identity(L.dim(), L.dim());
  Eigen::LLT<ComplexMatrix> llt(shifted);
  if (llt.info() != Eigen::Success) return 0.0;
  const auto tri = llt.matrixL();
  const ComplexMatrix x = tri.solve(b);
  const ComplexMatrix m = hermitian_part(tri.solve(ComplexMatrix(x.adjoint())));
  const double lmin = lambda_min(m);
  if (lmin >= 0.0) return tau_cap;
  return std::min(tau_cap, -1.0 / lmin);
}

RealVector default_start(const LagrangianProblem& L) {
  RealVector phi = RealVector::Zero(static_cast<Eigen::Index>(L.num_multipliers()));
  const double lmin_obj = lambda_min(L.objective().a());
  const double lmin_dot = lambda_min(L.constraints().compact().form.a());
  const double c_min = (L.eps() - lmin_obj) / lmin_dot;
  phi(L.compact_index()) = std::max(1.0, 2.0 * c_min);
  return phi;
}

namespace {

// Absorbs any lift into the compact multiplier so that the iterate's
// unconstrained maximizer lies in C and D is smooth around it.
DualState settle(const LagrangianProblem& L, RealVector phi) {
  DualState st = eval_dual(L, phi);
  for (int k = 0; k < 3 && st.status == DualStatus::Lifted; ++k) {
    phi(L.compact_index()) += st.lift_alpha;
    st = eval_dual(L, phi);
  }
  return st;
}

struct ActiveSet {
  RealMatrix normals;  // m x p
  RealVector nu;
  RealVector reduced;  // g - normals * nu
  std::vector<Eigen::Index> binding;
};

ActiveSet active_set(const LagrangianProblem& L, const DualState& st) {
  const auto m = static_cast<Eigen::Index>(L.num_multipliers());
  const Spectrum sp = shifted_spectrum(L, L.a_phi(st.phi));
  const double act = kActiveFactor * std::max(sp.a_norm, 1e-300);
  std::vector<RealVector> cols;
  for (Eigen::Index i = 0; i < sp.values.size() && sp.values(i) <= act; ++i) {
    const ComplexVector u = sp.vectors.col(i);
    RealVector a(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      a(k) = u.dot(L.constraints()[k].form.a() * u).real();
    }
    cols.push_back(std::move(a));
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    if (L.constraints()[k].kind == ConstraintKind::InequalityLE && st.phi(k) <= 1e-14) {
      cols.push_back(RealVector::Unit(m, k));
    }
  }
  ActiveSet as;
  as.normals.resize(m, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) as.normals.col(c) = cols[c];
  // Descent needs d with g.d < 0 and normals.d >= 0: stationarity means g lies
  // in the cone spanned by the normals.
  as.nu = nnls(as.normals, st.grad);
  as.reduced = st.grad - as.normals * as.nu;
  for (Eigen::Index c = 0; c < as.nu.size(); ++c) {
    if (as.nu(c) > 0.0) as.binding.push_back(c);
  }
  return as;
}

RealVector clip_inequalities(const LagrangianProblem& L, RealVector phi) {
  for (std::size_t k = 0; k < L.num_multipliers(); ++k) {
    if (L.constraints()[k].kind == ConstraintKind::InequalityLE && phi(k) < 0.0) phi(k) = 0.0;
  }
  return phi;
}

// Trial point phi + tau d pulled back into Phi_eps along e_dot when needed.
std::optional<DualState> trial(const LagrangianProblem& L, const RealVector& phi,
                               const RealVector& d, double tau) {
  RealVector next = clip_inequalities(L, phi + tau * d);
  const ComplexMatrix a = L.a_phi(next);
  const Spectrum sp = shifted_spectrum(L, a);
  if (sp.values(0) < 0.0) next(L.compact_index()) += compact_shift(L, a);
  try {
    return settle(L, next);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MultiplierOutsidePhiEps) return std::nullopt;
    throw;
  }
}


// Linearized constraints normals . d >= -bounds for eigenpairs of A_phi - eps I
// close enough to zero to block a Newton step, plus the sign constraints.
struct LinearizedCone {
  RealMatrix normals;
  RealVector bounds;
  // -Hessian of each eigenvalue constraint (positive semidefinite), one per
  // leading column of normals.
  std::vector<RealMatrix> curvature;
};

LinearizedCone linearized_cone(const LagrangianProblem& L, const DualState& st) {
  const auto m = static_cast<Eigen::Index>(L.num_multipliers());
  const Spectrum sp = shifted_spectrum(L, L.a_phi(st.phi));
  const double near = kNearActiveFactor * std::max(sp.a_norm, 1e-300);
  std::vector<RealVector> cols;
  std::vector<double> b;
  LinearizedCone cone;
  const Eigen::Index n = sp.values.size();
  for (Eigen::Index i = 0; i < n && sp.values(i) <= near; ++i) {
    const ComplexVector u = sp.vectors.col(i);
    // w(l, k) = u_l^dagger A_k u_i
    ComplexMatrix w(n, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      w.col(k) = sp.vectors.adjoint() * (L.constraints()[k].form.a() * u);
    }
    RealVector a(m);
    for (Eigen::Index k = 0; k < m; ++k) a(k) = w(i, k).real();
    // Second-order perturbation of lambda_i, skipping the near-active cluster
    // whose coupling the linearization already handles.
    RealMatrix curv = RealMatrix::Zero(m, m);
    for (Eigen::Index l = 0; l < n; ++l) {
      const double gap = sp.values(l) - sp.values(i);
      if (sp.values(l) <= near || gap <= 0.0) continue;
      const ComplexVector row = w.row(l).transpose();
      curv += (2.0 / gap) * (row.conjugate() * row.transpose()).real();
    }
    cone.curvature.push_back(0.5 * (curv + curv.transpose()));
    cols.push_back(std::move(a));
    b.push_back(std::max(sp.values(i), 0.0));
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    if (L.constraints()[k].kind == ConstraintKind::InequalityLE) {
      cols.push_back(RealVector::Unit(m, k));
      b.push_back(st.phi(k));
    }
  }
  cone.normals.resize(m, static_cast<Eigen::Index>(cols.size()));
  cone.bounds.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    cone.normals.col(c) = cols[c];
    cone.bounds(c) = b[c];
  }
  return cone;
}

// argmin g.d + d.M d / 2 subject to N^T d >= -b, through the bound-constrained
// dual min nu^T Q nu / 2 + c^T nu over nu >= 0 with Q = N^T M^{-1} N.
RealVector newton_step(const RealMatrix& model, const RealVector& g, const LinearizedCone& cone) {
  const Eigen::LDLT<RealMatrix> ldlt(model);
  const RealVector mg = ldlt.solve(g);
  const Eigen::Index p = cone.normals.cols();
  if (p == 0) return -mg;
  const RealMatrix mn = ldlt.solve(cone.normals);
  const RealMatrix q = cone.normals.transpose() * mn;
  const RealVector c = cone.bounds - cone.normals.transpose() * mg;
  RealVector nu = RealVector::Zero(p);
  for (int sweep = 0; sweep < 500; ++sweep) {
    double change = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (!(q(i, i) > 0.0)) continue;
      const double next = std::max(0.0, nu(i) - (q.row(i).dot(nu) + c(i)) / q(i, i));
      change = std::max(change, std::abs(next - nu(i)));
      nu(i) = next;
    }
    if (change <= 1e-15 * (1.0 + nu.cwiseAbs().maxCoeff())) break;
  }
  // Polish on the free set.
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < p; ++i) if (nu(i) > 0.0) free.push_back(i);
  if (!free.empty()) {
    const auto f = static_cast<Eigen::Index>(free.size());
    RealMatrix qf(f, f);
    RealVector cf(f);
    for (Eigen::Index a = 0; a < f; ++a) {
      cf(a) = c(free[a]);
      for (Eigen::Index b = 0; b < f; ++b) qf(a, b) = q(free[a], free[b]);
    }
    const RealVector sol = qf.completeOrthogonalDecomposition().solve(-cf);
    if (sol.allFinite() && sol.minCoeff() > 0.0) {
      for (Eigen::Index a = 0; a < f; ++a) nu(free[a]) = sol(a);
    }
  }
  return -(mg - mn * nu);
}

}  // namespace

DualSolution minimize_dual(const LagrangianProblem& L, const SolverConfig& cfg,
                           std::optional<RealVector> start) {
  const RealVector phi0 = start ? *start : default_start(L);
  DualState st = settle(L, phi0);
  DualSolution sol;
  sol.scale = std::abs(eval_dual(L, phi0).value) + 1.0;
  sol.values.push_back(st.value);
  const double tol = cfg.grad_tol * sol.scale;
  const double phi_cap = 1e12 * (1.0 + phi0.norm());
  const auto m = static_cast<Eigen::Index>(L.num_multipliers());

  for (int iter = 0;; ++iter) {
    const ActiveSet as = active_set(L, st);
    sol.projected_grad_norm = as.reduced.norm();
    sol.iterations = iter;
    if (sol.projected_grad_norm <= tol) {
      sol.termination = as.binding.empty() ? Termination::GradientTolerance
                                           : Termination::EpsBoundary;
      break;
    }
    // Accepted steps that no longer move D: the gradient floor sits above
    // tol, usually at a corner of the eps boundary.
    const std::size_t nv = sol.values.size();
    if (nv > kStagnationWindow &&
        sol.values[nv - 1 - kStagnationWindow] - sol.values.back() <=
            kStagnationDecrease * sol.scale) {
      sol.termination = as.binding.empty() ? Termination::Stalled : Termination::EpsBoundary;
      break;
    }
    if (iter >= cfg.max_iters) {
      std::ostringstream msg;
      msg << "dual descent did not converge in " << cfg.max_iters
          << " iterations (projected gradient " << sol.projected_grad_norm << ")";
      throw Error(ErrorCode::IterationLimit, msg.str());
    }

    const RealMatrix h = dual_hessian_unchecked(st, L);
    const LinearizedCone cone = linearized_cone(L, st);
    RealMatrix model_h = h;
    if (!cone.curvature.empty()) {
      const auto p = static_cast<Eigen::Index>(cone.curvature.size());
      const RealVector nu = nnls(cone.normals.leftCols(p), st.grad);
      for (Eigen::Index i = 0; i < p; ++i) model_h += nu(i) * cone.curvature[i];
    }
    const double hscale = std::max(model_h.diagonal().cwiseAbs().maxCoeff(),
                                   1e-12 * st.grad.norm() / (1.0 + st.phi.norm()));

    std::optional<DualState> accepted;
    auto search = [&](const RealVector& d, bool cap_to_boundary) {
      const double slope = st.grad.dot(d);
      if (!(slope < 0.0) || !d.allFinite()) return false;
      double tau = 1.0;
      if (cap_to_boundary) {
        const ComplexMatrix ad = L.a_phi(d) - L.objective().a();
        const double tmax = max_feasible_step(L, L.a_phi(st.phi), ad, 1.0);
        tau = tmax < 1.0 ? tmax * (1.0 - 1e-12) : 1.0;
      }
      for (int halving = 0; halving < 60 && tau > 0.0; ++halving, tau *= 0.5) {
        auto cand = trial(L, st.phi, d, tau);
        if (!cand) continue;
        const bool armijo = cand->value <= st.value + kArmijo * tau * slope;
        // Near the minimum predicted decreases fall below the rounding noise
        // of D; accept steps that stay within that noise and shrink the
        // gradient.
        const bool plateau = cand->value <= st.value + kValueNoise * sol.scale &&
                             cand->grad.norm() < 0.5 * st.grad.norm();
        if (armijo || plateau) {
          accepted = std::move(cand);
          return true;
        }
      }
      return false;
    };

    for (double lm = 1e-10; lm <= 1e6 && !accepted; lm *= 10.0) {
      const RealMatrix model = model_h + lm * hscale * RealMatrix::Identity(m, m);
      search(newton_step(model, st.grad, cone), cone.normals.cols() == 0);
    }
    if (!accepted) search(-as.reduced, true);
    if (!accepted) search(-st.grad, true);
    if (!accepted) {
      sol.termination = Termination::Stalled;
      break;
    }
    st = std::move(*accepted);
    sol.values.push_back(st.value);
    if (st.phi.norm() > phi_cap) {
      throw Error(ErrorCode::CoercivityFailure,
                  "multipliers diverge: the dual infimum is not attained");
    }
  }
  sol.state = std::move(st);
  return sol;
}

CoercivityResult coercivity_check(const LagrangianProblem& L, double delta, int n_samples,
                                  std::uint64_t seed) {
  const auto m = static_cast<Eigen::Index>(L.num_multipliers());
  const std::size_t ci = L.compact_index();
  CoercivityResult out;
  out.min_value = std::numeric_limits<double>::infinity();

  // Homogeneous problem: objective removed, cone A_psi >= 0.
  const LagrangianProblem cone(QuadraticForm::zero(L.dim()), L.constraints(), L.eps());
  auto probe = [&](RealVector psi) {
    for (Eigen::Index k = 0; k < m; ++k) {
      if (L.constraints()[k].kind == ConstraintKind::InequalityLE) psi(k) = std::abs(psi(k));
    }
    if (psi.norm() == 0.0) return;
    psi /= psi.norm();
    const ComplexMatrix a = cone.combination(psi).a();
    const double lmin = lambda_min(a);
    if (lmin < 0.0) {
      // Shift toward e_dot until A_psi >= 0.
      const auto tri = L.compact_factor().triangularView<Eigen::Lower>();
      const ComplexMatrix x = tri.solve(a);
      const double shift = -lambda_min(hermitian_part(tri.solve(ComplexMatrix(x.adjoint()))));
      psi(ci) += std::max(shift, 0.0);
      psi /= psi.norm();
    }
    const ConstrainedMax cm = maximize_over_compact(cone, cone.combination(psi));
    ++out.samples;
    if (cm.value < out.min_value) out.min_value = cm.value;
    if (!(cm.value > delta) && out.pass) {
      out.pass = false;
      out.fail_direction = psi;
    }
  };

  for (Eigen::Index k = 0; k < m; ++k) probe(RealVector::Unit(m, k));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      probe(RealVector::Unit(m, i) + RealVector::Unit(m, j));
      probe(RealVector::Unit(m, i) - RealVector::Unit(m, j));
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int n = 0; n < n_samples; ++n) {
    RealVector psi(m);
    for (Eigen::Index k = 0; k < m; ++k) psi(k) = normal(rng);
    probe(std::move(psi));
  }
  return out;
}

}  // namespace duality_bounds
