#include "duality_bounds/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "duality_bounds/errors.hpp"

namespace duality_bounds {

namespace {

// Internal bands are tightened by this factor so that the verified
// inequalities hold strictly.
constexpr double kBandShrink = 0.5;

struct Residual {
  double value = 0.0;  // penalty residual (0 when inside the band)
  RealVector jac;      // d value / d x in real coordinates
};

RealVector real_coords(const ComplexVector& v) {
  RealVector x(2 * v.size());
  x.head(v.size()) = v.real();
  x.tail(v.size()) = v.imag();
  return x;
}

ComplexVector complex_coords(const RealVector& x) {
  const Eigen::Index n = x.size() / 2;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(x(i), x(n + i));
  return v;
}

// Gradient in real coordinates of f at t: 2 [Re g; Im g] with g = s - A t.
RealVector form_gradient(const QuadraticForm& f, const ComplexVector& t) {
  return 2.0 * real_coords(f.s() - f.a() * t);
}

struct Band {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

std::vector<Band> bands(const LagrangianProblem& L, const RealVector& targets, double shrink) {
  std::vector<Band> out(L.num_multipliers());
  for (std::size_t k = 0; k < L.num_multipliers(); ++k) {
    const double b = targets(k);
    if (k == L.compact_index()) {
      // One-sided ceiling, pushed further down by the shrink.
      out[k].upper = b - (1.0 - shrink) * std::abs(b);
    } else if (L.constraints()[k].kind == ConstraintKind::InequalityLE) {
      out[k].lower = -shrink * b;
    } else {
      out[k].lower = -shrink * b;
      out[k].upper = shrink * b;
    }
  }
  return out;
}

std::vector<Residual> residuals(const LagrangianProblem& L, const ComplexVector& t,
                                const std::vector<Band>& bd) {
  std::vector<Residual> out;
  for (std::size_t k = 0; k < L.num_multipliers(); ++k) {
    const QuadraticForm& f = L.constraints()[k].form;
    const double e = f(t);
    if (e > bd[k].upper) {
      out.push_back({e - bd[k].upper, form_gradient(f, t)});
    } else if (e < bd[k].lower) {
      out.push_back({e - bd[k].lower, form_gradient(f, t)});
    }
  }
  return out;
}

bool inside(const LagrangianProblem& L, const ComplexVector& t, const std::vector<Band>& bd) {
  for (std::size_t k = 0; k < L.num_multipliers(); ++k) {
    const double e = L.constraints()[k].form(t);
    if (!(e <= bd[k].upper && e >= bd[k].lower)) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::StrongDual: return "StrongDual";
    case CertificateKind::GapSuspected: return "GapSuspected";
  }
  return "unknown";
}

Certificate certify(const DualState& state, const LagrangianProblem& L, double scale,
                    double cert_tol) {
  Certificate c;
  c.scale = scale;
  const auto m = static_cast<Eigen::Index>(L.num_multipliers());
  c.residuals.resize(m);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double r = L.constraints()[k].form(state.t_star);
    c.residuals(k) = r;
    if (L.constraints()[k].kind == ConstraintKind::InequalityLE) {
      // Feasible side is r >= 0; complementary slackness needs phi_k r = 0.
      worst = std::max(worst, std::max(-r, 0.0));
      worst = std::max(worst, std::abs(state.phi(k) * r));
    } else {
      worst = std::max(worst, std::abs(r));
    }
  }
  c.max_violation = worst / scale;
  c.primal_value = L.objective()(state.t_star);
  c.dual_value = state.value;
  c.gap = c.dual_value - c.primal_value;
  const bool feasible = c.max_violation <= cert_tol;
  const bool tight = std::abs(c.gap) <= cert_tol * scale;
  c.kind = feasible && tight ? CertificateKind::StrongDual : CertificateKind::GapSuspected;
  return c;
}

QuadraticForm subtract_compact(const QuadraticForm& f_obj, const Constraint& f_dot, double c) {
  if (!(c > 0.0)) {
    throw Error(ErrorCode::PreconditionViolation, "compact subtraction needs c > 0");
  }
  return QuadraticForm(f_obj.s() - c * f_dot.form.s(), f_obj.a() - c * f_dot.form.a(),
                       f_obj.v() - c * f_dot.form.v());
}

RealVector default_margins(const LagrangianProblem& L, const ComplexVector& t_star,
                           double scale, double cert_tol) {
  const auto m = static_cast<Eigen::Index>(L.num_multipliers());
  RealVector margins(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double v = L.constraints()[k].form(t_star);
    if (static_cast<std::size_t>(k) == L.compact_index()) {
      margins(k) = 1.01 * std::max(v, 0.0) + 1e-8 * scale;
      continue;
    }
    const double floor_band = 0.5 * cert_tol * scale;
    const bool violated = L.constraints()[k].kind == ConstraintKind::InequalityLE
                              ? -v > floor_band
                              : std::abs(v) > floor_band;
    if (violated) {
      margins(k) = 0.5 * std::abs(v);
    } else {
      // Satisfied constraints keep a band of at least half the certificate
      // tolerance (a negative margin widens |v| to that floor).
      margins(k) = std::abs(v) - std::max(std::abs(v), floor_band);
    }
  }
  return margins;
}

RealVector restore_targets(const LagrangianProblem& L, const ComplexVector& t_star,
                           const RealVector& margins) {
  const auto m = static_cast<Eigen::Index>(L.num_multipliers());
  if (margins.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "one margin per constraint required");
  }
  RealVector targets(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double v = L.constraints()[k].form(t_star);
    if (static_cast<std::size_t>(k) == L.compact_index()) {
      targets(k) = v - margins(k);
    } else if (L.constraints()[k].kind == ConstraintKind::InequalityLE) {
      targets(k) = std::abs(std::min(v, 0.0)) - margins(k);
    } else {
      targets(k) = std::abs(v) - margins(k);
    }
    if (static_cast<std::size_t>(k) != L.compact_index() && !(targets(k) > 0.0)) {
      std::ostringstream msg;
      msg << "margin " << margins(k) << " leaves an empty band for constraint " << k;
      throw Error(ErrorCode::PreconditionViolation, msg.str());
    }
  }
  return targets;
}

ComplexVector feasibility_restore(const LagrangianProblem& L, const ComplexVector& t_star,
                                  double a_obj, const RealVector& margins,
                                  const RestoreConfig& cfg) {
  if (!(a_obj > 0.0)) {
    throw Error(ErrorCode::PreconditionViolation, "a_obj must be positive");
  }
  const RealVector targets = restore_targets(L, t_star, margins);
  const std::vector<Band> verify = bands(L, targets, 1.0);
  const std::vector<Band> work = bands(L, targets, kBandShrink);
  const Eigen::Index n = L.dim();
  const RealVector s_obj = 2.0 * real_coords(L.objective().s());

  // Penalized merit: a |x|^2 - 2Re(x^dagger s_obj) + mu/2 sum r^2.
  auto merit = [&](const RealVector& x, double mu) {
    const ComplexVector t = t_star + complex_coords(x);
    double pen = 0.0;
    for (const auto& r : residuals(L, t, work)) pen += r.value * r.value;
    return a_obj * x.squaredNorm() - s_obj.dot(x) + 0.5 * mu * pen;
  };

  std::mt19937_64 rng(cfg.seed ^ 0xD1B54A32D192ED03ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  RealVector x(2 * n);
  // A small seeded offset: the constraint gradients can all vanish at t*
  // (e.g. at the centre of the compact ball).
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
  x *= 1e-3 * (t_star.norm() + 1e-12) / x.norm();

  auto gauss_newton = [&](double mu, double obj_weight, int steps) {
    double lm = 1e-8;
    for (int it = 0; it < steps; ++it) {
      const ComplexVector t = t_star + complex_coords(x);
      const auto res = residuals(L, t, work);
      RealMatrix h = 2.0 * obj_weight * a_obj * RealMatrix::Identity(2 * n, 2 * n);
      RealVector g = obj_weight * (2.0 * a_obj * x - s_obj);
      for (const auto& r : res) {
        h += mu * r.jac * r.jac.transpose();
        g += mu * r.value * r.jac;
      }
      if (g.norm() <= 1e-15 * (1.0 + mu)) break;
      auto eval = [&](const RealVector& y) {
        if (obj_weight > 0.0) return merit(y, mu);
        double pen = 0.0;
        for (const auto& r : residuals(L, t_star + complex_coords(y), work)) {
          pen += r.value * r.value;
        }
        return pen;
      };
      const double f0 = eval(x);
      bool moved = false;
      for (int tries = 0; tries < 30 && !moved; ++tries) {
        const double hs = std::max(h.diagonal().maxCoeff(), 1e-300);
        const RealMatrix reg = h + lm * hs * RealMatrix::Identity(2 * n, 2 * n);
        const RealVector dx = -reg.ldlt().solve(g);
        const double f1 = eval(x + dx);
        if (dx.allFinite() && f1 < f0) {
          x += dx;
          lm = std::max(lm * 0.1, 1e-12);
          moved = true;
        } else {
          lm *= 10.0;
        }
      }
      if (!moved) break;
    }
  };

  double mu = a_obj;
  for (int stage = 0; stage < cfg.stages; ++stage) {
    gauss_newton(mu, 1.0, cfg.inner_steps);
    if (inside(L, t_star + complex_coords(x), work)) break;
    mu *= cfg.penalty_growth;
  }
  if (!inside(L, t_star + complex_coords(x), work)) {
    // Penalty stages left a residual violation: finish with a pure
    // feasibility projection.
    gauss_newton(1.0, 0.0, cfg.inner_steps);
  }
  const ComplexVector t_delta = complex_coords(x);
  if (!inside(L, t_star + t_delta, verify)) {
    throw Error(ErrorCode::RestoreFailure,
                "penalty continuation did not reach the requested constraint bands");
  }
  return t_delta;
}

SourceModification modify_source(const LagrangianProblem& L, const RealVector& phi_last,
                                  const ComplexVector& t_delta) {
  if (t_delta.size() != L.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "t_delta has the wrong dimension");
  }
  const ComplexMatrix a = L.a_phi(phi_last);
  const double lmin = lambda_min(a) - L.eps();
  if (lmin < -kEigenToleranceFactor * hermitian_operator_norm(a)) {
    throw Error(ErrorCode::MultiplierOutsidePhiEps,
                "source modification needs multipliers inside Phi_eps");
  }
  ComplexVector delta = ComplexVector::Zero(L.dim());
  if (t_delta.norm() > 0.0) delta = a * t_delta;
  const QuadraticForm& obj = L.objective();
  QuadraticForm next(obj.s() + delta, obj.a(), obj.v());
  return {L.with_objective(std::move(next)), std::move(delta)};
}

LagrangianProblem bound_feedback(const LagrangianProblem& original,
                                 const QuadraticForm& modified_obj, double modified_bound) {
  if (std::isinf(modified_bound) && modified_bound > 0.0) return original;
  if (!std::isfinite(modified_bound)) {
    throw Error(ErrorCode::InvalidInput, "bound must be finite or +infinity");
  }
  // f_mod(t) <= B  <=>  2Re(t^dagger (-s_mod)) - t^dagger (-A_mod) t + B >= 0.
  Constraint c{QuadraticForm(-modified_obj.s(), -modified_obj.a(), modified_bound),
               ConstraintKind::InequalityLE, "bound-feedback"};
  return original.with_constraints(original.constraints().with(std::move(c)));
}

RefinementTrace run_restart_loop(const LagrangianProblem& L, const RefinementConfig& cfg) {
  RefinementTrace trace;
  LagrangianProblem current = L;
  DualSolution sol = minimize_dual(current, cfg.solver);
  Certificate cert = certify(sol.state, current, sol.scale, cfg.cert_tol);
  trace.iterations.push_back({ComplexVector(), 1.0, cert.dual_value, cert.max_violation,
                              sol.termination, sol.iterations});

  auto attempt = [&](const ComplexVector& t_delta, double alpha)
      -> std::optional<std::tuple<SourceModification, DualSolution, Certificate>> {
    try {
      SourceModification mod = modify_source(current, sol.state.phi, alpha * t_delta);
      DualSolution next = minimize_dual(mod.problem, cfg.solver);
      Certificate c = certify(next.state, mod.problem, next.scale, cfg.cert_tol);
      return std::make_tuple(std::move(mod), std::move(next), std::move(c));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IterationLimit || e.code() == ErrorCode::CoercivityFailure) {
        return std::nullopt;
      }
      throw;
    }
  };

  int restart = 0;
  while (cert.kind != CertificateKind::StrongDual) {
    if (restart >= cfg.max_restarts) {
      trace.restart_cap_reached = true;
      break;
    }
    ++restart;
    RealVector margins;
    if (cfg.single_shot) {
      // Aim straight at the certificate band for every constraint.
      margins = default_margins(current, sol.state.t_star, sol.scale, cfg.cert_tol);
      for (Eigen::Index k = 0; k < margins.size(); ++k) {
        if (static_cast<std::size_t>(k) == current.compact_index()) continue;
        const double v = std::abs(current.constraints()[k].form(sol.state.t_star));
        const double band = 0.5 * cfg.cert_tol * sol.scale;
        if (v > band) margins(k) = v - band;
      }
    } else {
      margins = default_margins(current, sol.state.t_star, sol.scale, cfg.cert_tol);
    }
    ComplexVector t_delta;
    try {
      RestoreConfig rc = cfg.restore;
      rc.seed = cfg.restore.seed + static_cast<std::uint64_t>(restart);
      t_delta = feasibility_restore(current, sol.state.t_star, cfg.a_obj, margins, rc);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RestoreFailure) throw;
      trace.progress_stalled = true;
      break;
    }

    auto full = attempt(t_delta, 1.0);
    if (!full) {
      trace.progress_stalled = true;
      break;
    }
    double alpha = 1.0;
    if (cfg.hybrid_alpha && std::get<2>(*full).kind == CertificateKind::StrongDual) {
      // Smallest modification magnitude that still certifies.
      double lo = 0.0;
      double hi = 1.0;
      auto best = std::move(full);
      for (int step = 0; step < cfg.alpha_steps; ++step) {
        const double mid = 0.5 * (lo + hi);
        auto trial = attempt(t_delta, mid);
        if (trial && std::get<2>(*trial).kind == CertificateKind::StrongDual &&
            std::get<2>(*trial).max_violation < cert.max_violation) {
          hi = mid;
          best = std::move(trial);
        } else {
          lo = mid;
        }
      }
      alpha = hi;
      full = std::move(best);
    }
    auto& [mod, next, next_cert] = *full;
    if (!(next_cert.max_violation < cert.max_violation)) {
      trace.progress_stalled = true;
      break;
    }
    trace.iterations.push_back({mod.delta_s, alpha, next_cert.dual_value,
                                next_cert.max_violation, next.termination, next.iterations});
    current = mod.problem;
    sol = std::move(next);
    cert = std::move(next_cert);
  }
  trace.final = cert;
  trace.final_objective = current.objective();
  trace.final_solution = std::move(sol);
  return trace;
}

}  // namespace duality_bounds
