#include "duality_bounds/verification.hpp"

#include <algorithm>
#include <cmath>

#include "duality_bounds/errors.hpp"
#include "duality_bounds/refinement.hpp"

namespace duality_bounds {

namespace {

constexpr double kDivergence = 1e12;
constexpr double kFdStep = 1e-5;
constexpr double kInteriorMargin = 1e-3;

RealVector residuals(const LagrangianProblem& L, const ComplexVector& t) {
  const auto m = static_cast<Eigen::Index>(L.num_multipliers());
  RealVector r(m);
  for (Eigen::Index k = 0; k < m; ++k) r(k) = L.constraints()[k].form(t);
  return r;
}

bool is_inequality(const LagrangianProblem& L, Eigen::Index k) {
  return L.constraints()[k].kind == ConstraintKind::InequalityLE;
}

// Unit psi (inequality parts >= 0) with sum_k psi_k A_k >= eps, reached by
// adding a multiple of e_dot and renormalizing; the multiple is found by
// doubling and bisection.
RealVector into_cone(const LagrangianProblem& L, RealVector psi) {
  const auto m = psi.size();
  for (Eigen::Index k = 0; k < m; ++k) {
    if (is_inequality(L, k)) psi(k) = std::max(psi(k), 0.0);
  }
  const auto ci = static_cast<Eigen::Index>(L.compact_index());
  if (psi.norm() == 0.0) return RealVector::Unit(m, ci);
  psi /= psi.norm();
  const ComplexMatrix a = L.combination(psi).a();
  const ComplexMatrix a_dot = L.constraints().compact().form.a();
  auto ok = [&](double sigma) {
    RealVector q = psi;
    q(ci) += sigma;
    return lambda_min(a + sigma * a_dot) >= L.eps() * q.norm() * (1.0 + 1e-9);
  };
  if (ok(0.0)) return psi;
  double hi = 1.0;
  while (!ok(hi)) {
    hi *= 2.0;
    if (hi > 1e30) return RealVector::Unit(m, ci);
  }
  double lo = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  psi(ci) += hi;
  return psi / psi.norm();
}

RealVector gaussian(Eigen::Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RealVector x(m);
  for (Eigen::Index k = 0; k < m; ++k) x(k) = normal(rng);
  return x;
}

}  // namespace

OracleResult oracle_bound(const ScatteringProblem& p, const QuadraticForm& f_obj) {
  OracleResult best;
  best.value = -std::numeric_limits<double>::infinity();
  for (const auto& [rho, t] : enumerate_designs(p)) {
    const double v = f_obj(t);
    if (v > best.value) {
      best.value = v;
      best.argmax = rho;
      best.t = t;
    }
  }
  return best;
}

double dual_scale(const LagrangianProblem& L) {
  return std::abs(eval_dual(L, default_start(L)).value) + 1.0;
}

PrimalSample primal_sample(const LagrangianProblem& L, const ComplexVector& t) {
  PrimalSample s;
  s.t = t;
  s.constraint_residuals = residuals(L, t);
  s.in_C = s.constraint_residuals(static_cast<Eigen::Index>(L.compact_index())) >= 0.0;
  return s;
}

RealVector sample_combination(const LagrangianProblem& L, std::mt19937_64& rng) {
  RealVector psi = gaussian(static_cast<Eigen::Index>(L.num_multipliers()), rng);
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    if (is_inequality(L, k)) psi(k) = std::abs(psi(k));
  }
  return into_cone(L, std::move(psi));
}

RealVector sample_phi_eps(const LagrangianProblem& L, std::mt19937_64& rng) {
  RealVector phi =
      default_start(L) + gaussian(static_cast<Eigen::Index>(L.num_multipliers()), rng);
  for (Eigen::Index k = 0; k < phi.size(); ++k) {
    if (is_inequality(L, k)) phi(k) = std::abs(phi(k));
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  phi(static_cast<Eigen::Index>(L.compact_index())) +=
      compact_shift(L, L.a_phi(phi)) + unit(rng);
  return phi;
}

std::string_view to_string(QVerdict v) {
  switch (v) {
    case QVerdict::NotInQ: return "not-in-Q";
    case QVerdict::NoViolationFound: return "no-violation-found";
  }
  return "unknown";
}

QMembership q_membership(const LagrangianProblem& L, const ComplexVector& t, int budget,
                         std::uint64_t seed) {
  QMembership out;
  if (budget <= 0) return out;
  const double scale = dual_scale(L);
  const RealVector r = residuals(L, t);
  const auto m = r.size();
  if (r.norm() == 0.0) {
    out.best_combination_value = 0.0;
    return out;
  }
  const RealVector dir = r / r.norm();
  std::mt19937_64 rng(seed);
  RealVector best;
  for (int start = 0; start < budget; ++start) {
    RealVector psi = start == 0
                         ? RealVector::Unit(m, static_cast<Eigen::Index>(L.compact_index()))
                         : sample_combination(L, rng);
    double value = psi.dot(r);
    // Feasible-direction descent on the linear objective psi . r.
    for (double tau = 1.0; tau > 1e-6;) {
      const RealVector cand = into_cone(L, psi - tau * dir);
      const double cv = cand.dot(r);
      if (cv < value) {
        psi = cand;
        value = cv;
      } else {
        tau *= 0.5;
      }
    }
    if (value < out.best_combination_value) {
      out.best_combination_value = value;
      best = psi;
    }
  }
  if (out.best_combination_value < -1e-10 * scale) {
    const QuadraticForm f = L.combination(best);
    const ComplexMatrix a = f.a();
    const double tol = kEigenToleranceFactor * hermitian_operator_norm(a);
    if (lambda_min(a) - L.eps() >= -tol && f(t) < 0.0) {
      out.verdict = QVerdict::NotInQ;
      out.certificate = best;
    }
  }
  return out;
}

double sampled_F(const LagrangianProblem& L, const ComplexVector& t, int budget,
                 std::uint64_t seed) {
  const QuadraticForm& f_dot = L.constraints().compact().form;
  const double cs = constraint_scale(f_dot, t);
  if (f_dot(t) < -kLiftTolerance * (cs > 0.0 ? cs : 1.0)) {
    throw Error(ErrorCode::OutsideCompactSet, "sampled_F requires t in C");
  }
  const double scale = dual_scale(L);
  const RealVector r = residuals(L, t);
  const double f_obj = L.objective()(t);
  bool feasible = true;
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    const double bad = is_inequality(L, k) ? -r(k) : std::abs(r(k));
    if (bad > kDefaultCertTol * scale) feasible = false;
  }
  if (feasible) return f_obj;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  if (q_membership(L, t, budget, seed).verdict == QVerdict::NotInQ) return neg_inf;

  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  const RealVector d = -r;
  const ComplexMatrix a_d = L.combination(d).a();
  double best = std::numeric_limits<double>::infinity();
  for (int start = 0; start < std::max(budget, 1); ++start) {
    const RealVector phi = start == 0 ? default_start(L) : sample_phi_eps(L, rng);
    best = std::min(best, f_obj + phi.dot(r));
    double tau = max_feasible_step(L, L.a_phi(phi), a_d, 1e300);
    for (Eigen::Index k = 0; k < phi.size(); ++k) {
      if (is_inequality(L, k) && d(k) < 0.0) tau = std::min(tau, -phi(k) / d(k));
    }
    if (tau >= 1e300) return neg_inf;  // the whole ray stays in Phi_eps
    const double v = f_obj + (phi + tau * (1.0 - 1e-12) * d).dot(r);
    if (v < -kDivergence * scale) return neg_inf;
    best = std::min(best, v);
  }
  return best;
}

ViolationBoundReport violation_bound_check(const LagrangianProblem& L, const ComplexVector& t,
                                           const QuadraticForm& f_d, double delta) {
  const ComplexMatrix& a_d = f_d.a();
  if (lambda_min(a_d) - L.eps() < -kEigenToleranceFactor * hermitian_operator_norm(a_d)) {
    throw Error(ErrorCode::PreconditionViolation, "f_d is not eps-definite");
  }
  const double fd = f_d(t);
  const double slack = 1e-12 * constraint_scale(f_d, t);
  if (!(delta >= 0.0) || fd < -slack || fd > delta + slack) {
    throw Error(ErrorCode::PreconditionViolation, "f_d(t) must lie in [0, delta]");
  }
  ViolationBoundReport rep;
  rep.f_d_value = fd;
  rep.delta = delta;
  for (std::size_t k = 0; k < L.num_multipliers(); ++k) {
    const QuadraticForm& f = L.constraints()[k].form;
    BoundMargin bm;
    bm.constraint = k;
    bm.value = std::abs(f(t));
    bm.bound = 2.0 * delta * hermitian_operator_norm(f.a()) / L.eps();
    bm.pass = bm.value <= bm.bound + 1e-10 * constraint_scale(f, t);
    rep.pass = rep.pass && bm.pass;
    rep.margins.push_back(bm);
  }
  return rep;
}

CombinationReport psd_combination_check(const LagrangianProblem& L, const ComplexVector& t,
                                        int n_samples, std::uint64_t seed, double scale,
                                        double tol) {
  CombinationReport rep;
  rep.tolerance = tol;
  std::mt19937_64 rng(seed);
  const RealVector r = residuals(L, t);
  for (int i = 0; i < n_samples; ++i) {
    const RealVector psi = sample_combination(L, rng);
    rep.min_value = std::min(rep.min_value, psi.dot(r) / scale);
    ++rep.samples;
  }
  rep.pass = rep.samples == 0 || rep.min_value >= -tol;
  return rep;
}

FdReport fd_check_suite(const LagrangianProblem& L, int n_points, std::uint64_t seed) {
  FdReport rep;
  std::mt19937_64 rng(seed);
  const auto m = static_cast<Eigen::Index>(L.num_multipliers());
  const int max_attempts = 20 * n_points + 20;
  for (int attempt = 0; rep.points < n_points && attempt < max_attempts; ++attempt) {
    RealVector phi = sample_phi_eps(L, rng);
    try {
      DualState st = eval_dual(L, phi);
      if (st.status == DualStatus::Lifted) {
        // Step past the lift: f_dot(t_hat) grows with phi_dot.
        std::uniform_real_distribution<double> unit(1.0, 2.0);
        phi(static_cast<Eigen::Index>(L.compact_index())) += st.lift_alpha * unit(rng);
        st = eval_dual(L, phi);
      }
      if (st.status != DualStatus::Interior || st.lambda_min <= kInteriorMargin) {
        ++rep.excluded;
        continue;
      }
      RealVector fd_grad(m);
      RealMatrix fd_hess(m, m);
      bool clean = true;
      for (Eigen::Index k = 0; k < m && clean; ++k) {
        const RealVector e = RealVector::Unit(m, k) * kFdStep;
        const DualState up = eval_dual(L, phi + e);
        const DualState dn = eval_dual(L, phi - e);
        clean = up.status == DualStatus::Interior && dn.status == DualStatus::Interior;
        fd_grad(k) = (up.value - dn.value) / (2.0 * kFdStep);
        fd_hess.col(k) = (up.grad - dn.grad) / (2.0 * kFdStep);
      }
      if (!clean) {
        ++rep.excluded;
        continue;
      }
      const RealMatrix h = dual_hessian(st, L);
      const double g_ref = std::max(st.grad.cwiseAbs().maxCoeff(), 1e-300);
      const double h_ref = std::max(h.cwiseAbs().maxCoeff(), 1e-300);
      rep.max_grad_rel_err =
          std::max(rep.max_grad_rel_err, (fd_grad - st.grad).cwiseAbs().maxCoeff() / g_ref);
      rep.max_hess_rel_err =
          std::max(rep.max_hess_rel_err, (fd_hess - h).cwiseAbs().maxCoeff() / h_ref);
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(h, Eigen::EigenvaluesOnly);
      const double hn = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
      rep.min_hess_eig_rel = std::min(rep.min_hess_eig_rel, es.eigenvalues()(0) / hn);
      ++rep.points;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MultiplierOutsidePhiEps &&
          e.code() != ErrorCode::BoundaryState) {
        throw;
      }
      ++rep.excluded;
    }
  }
  rep.pass = rep.max_grad_rel_err <= 1e-6 && rep.max_hess_rel_err <= 1e-4 &&
             rep.min_hess_eig_rel >= -1e-8;
  return rep;
}

MinimaxReport minimax_cross_check(const LagrangianProblem& L, const ScatteringProblem& p,
                                  int budget, std::uint64_t seed) {
  MinimaxReport rep;
  const DualSolution sol = minimize_dual(L, SolverConfig{});
  rep.dual_value = sol.state.value;
  rep.scale = sol.scale;

  std::vector<ComplexVector> designs;
  for (const auto& [rho, t] : enumerate_designs(p)) designs.push_back(t);
  std::vector<ComplexVector> points = designs;
  const Certificate cert = certify(sol.state, L, sol.scale);
  if (cert.kind == CertificateKind::StrongDual) {
    points.push_back(sol.state.t_star);
    rep.includes_dual_point = true;
  }
  rep.feasible_points = static_cast<int>(points.size());

  std::uint64_t s = seed;
  for (const auto& t : points) {
    rep.max_sampled_F = std::max(rep.max_sampled_F, sampled_F(L, t, budget, s++));
  }
  rep.upper_ok = rep.max_sampled_F <= rep.dual_value + 1e-7 * rep.scale;

  std::mt19937_64 rng(seed);
  for (int i = 0; i < budget; ++i) {
    const QuadraticForm lag = L.lagrangian(sample_phi_eps(L, rng));
    for (const auto& t : designs) {
      rep.worst_lagrangian_slack =
          std::min(rep.worst_lagrangian_slack, lag(t) - L.objective()(t));
    }
    ++rep.phi_samples;
  }
  rep.lower_ok = rep.phi_samples == 0 || rep.worst_lagrangian_slack >= -1e-9 * rep.scale;
  rep.sandwich_gap = rep.dual_value - rep.max_sampled_F;
  rep.pass = rep.upper_ok && rep.lower_ok;
  return rep;
}

}  // namespace duality_bounds
