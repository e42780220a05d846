#include "doctest.h"
#include "support.hpp"

#include <limits>

#include "duality_bounds/corpus.hpp"
#include "duality_bounds/objectives.hpp"
#include "duality_bounds/refinement.hpp"
#include "duality_bounds/verification.hpp"

using namespace duality_bounds;
using testing::error_of;

namespace {

CorpusInstance gap_instance(const std::string& name) {
  for (const auto& inst : gap_corpus()) {
    if (inst.name == name) return inst;
  }
  throw std::runtime_error("no gap instance " + name);
}

bool band_ok(const LagrangianProblem& L, const ComplexVector& t, const RealVector& targets) {
  for (std::size_t k = 0; k < L.num_multipliers(); ++k) {
    const double v = L.constraints()[k].form(t);
    const double tk = targets(static_cast<Eigen::Index>(k));
    if (k == L.compact_index()) {
      if (v > tk) return false;
    } else if (L.constraints()[k].kind == ConstraintKind::InequalityLE) {
      if (v < -tk) return false;
    } else if (std::abs(v) > tk) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("certify") {
  SUBCASE("a strongly dual corpus instance") {
    int strong = 0;
    for (const auto& inst : regression_corpus()) {
      ScatteringProblem p = build_problem(inst);
      LagrangianProblem L = build_lagrangian(inst, p);
      DualSolution sol = minimize_dual(L, {});
      if (sol.termination != Termination::GradientTolerance) continue;
      Certificate c = certify(sol.state, L, sol.scale);
      if (c.kind != CertificateKind::StrongDual) continue;
      ++strong;
      CHECK(std::abs(c.gap) <= 1e-7 * sol.scale);
      CHECK(c.max_violation <= 1e-7);
      if (strong == 2) break;
    }
    CHECK(strong == 2);
  }
  SUBCASE("boundary termination is a suspected gap") {
    CorpusInstance inst = gap_instance("gap-compact-0");
    ScatteringProblem p = build_problem(inst);
    LagrangianProblem L = build_lagrangian(inst, p);
    DualSolution sol = minimize_dual(L, {});
    CHECK(sol.termination == Termination::EpsBoundary);
    Certificate c = certify(sol.state, L, sol.scale);
    CHECK(c.kind == CertificateKind::GapSuspected);
    CHECK(c.max_violation > 1e-3);
    CHECK(c.residuals.size() == 1);
  }
  SUBCASE("zero objective with no incident field") {
    ScatteringProblem base = build_toy_problem(6, 3, 0.3, 0.5, 1);
    ScatteringProblem p(base.G(), base.v_diagonal(), base.partition(), ComplexVector::Zero(6),
                        base.eps_passivity());
    LagrangianProblem L =
        LagrangianProblem::with_eps_factor(QuadraticForm::zero(6), default_family(p, {}));
    DualSolution sol = minimize_dual(L, {});
    Certificate c = certify(sol.state, L, sol.scale);
    CHECK(c.kind == CertificateKind::StrongDual);
    CHECK(sol.state.t_star.norm() == 0.0);
  }
}

TEST_CASE("subtract_compact") {
  CorpusInstance inst = regression_corpus()[2];
  ScatteringProblem p = build_problem(inst);
  LagrangianProblem L = build_lagrangian(inst, p);
  const Constraint& fc = L.constraints().compact();
  const QuadraticForm& f = L.objective();

  const double c = 0.75;
  QuadraticForm g = subtract_compact(f, fc, c);
  CHECK((g.a() - (f.a() - c * fc.form.a())).norm() <= 1e-14 * (1.0 + f.a().norm()));
  CHECK((g.s() - (f.s() - c * fc.form.s())).norm() <= 1e-14 * (1.0 + f.s().norm()));
  CHECK(error_of([&] { subtract_compact(f, fc, 0.0); }) == ErrorCode::PreconditionViolation);

  for (const auto& [rho, t] : enumerate_designs(p)) {
    CHECK(g(t) == doctest::Approx(f(t)).epsilon(1e-12).scale(1.0));
  }
  DualSolution before = minimize_dual(L, {});
  DualSolution after = minimize_dual(L.with_objective(g), {});
  CHECK(after.state.value <= before.state.value + 1e-9 * before.scale);
  CHECK(oracle_bound(p, g).value == doctest::Approx(oracle_bound(p, f).value).epsilon(1e-12));
}

TEST_CASE("feasibility_restore") {
  CorpusInstance inst = gap_instance("gap-family-0");
  ScatteringProblem p = build_problem(inst);
  LagrangianProblem L = build_lagrangian(inst, p);
  DualSolution sol = minimize_dual(L, {});
  const ComplexVector& t = sol.state.t_star;

  SUBCASE("wide bands leave the regularized maximizer") {
    RealVector margins = RealVector::Constant(static_cast<Eigen::Index>(L.num_multipliers()), -1e6);
    const double a_obj = 50.0;
    ComplexVector td = feasibility_restore(L, t, a_obj, margins);
    CHECK((td - L.objective().s() / a_obj).norm() <= 1e-6 * (1.0 + td.norm()));
  }
  SUBCASE("violated residuals shrink into their bands") {
    RealVector margins = default_margins(L, t, sol.scale);
    RealVector targets = restore_targets(L, t, margins);
    CHECK_FALSE(band_ok(L, t, targets));
    ComplexVector td = feasibility_restore(L, t, 1.0, margins);
    CHECK(band_ok(L, t + td, targets));
  }
  SUBCASE("stronger regularization gives smaller steps") {
    RealVector margins = default_margins(L, t, sol.scale);
    double prev = std::numeric_limits<double>::infinity();
    for (double a : {0.1, 1.0, 10.0}) {
      ComplexVector td = feasibility_restore(L, t, a, margins);
      CHECK(td.norm() <= prev * (1.0 + 1e-6));
      prev = td.norm();
    }
  }
  SUBCASE("preconditions") {
    RealVector margins = default_margins(L, t, sol.scale);
    CHECK(error_of([&] { feasibility_restore(L, t, 0.0, margins); }) ==
          ErrorCode::PreconditionViolation);
    CHECK(error_of([&] { feasibility_restore(L, t, 1.0, RealVector::Zero(2)); }) ==
          ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("modify_source") {
  CorpusInstance inst = gap_instance("gap-compact-1");
  ScatteringProblem p = build_problem(inst);
  LagrangianProblem L = build_lagrangian(inst, p);
  DualSolution sol = minimize_dual(L, {});
  SUBCASE("zero step leaves the problem unchanged") {
    SourceModification m = modify_source(L, sol.state.phi, ComplexVector::Zero(L.dim()));
    CHECK(m.delta_s.norm() == 0.0);
    CHECK(m.problem.objective().s() == L.objective().s());
    CHECK(m.problem.objective().a() == L.objective().a());
  }
  SUBCASE("the maximizer at the last multiplier moves by t_delta") {
    std::mt19937_64 rng(2);
    ComplexVector td = 1e-2 * testing::random_vector(L.dim(), rng);
    RealVector phi = sol.state.phi;
    phi(L.compact_index()) += 1.0;  // away from the boundary
    SourceModification m = modify_source(L, phi, td);
    ComplexVector t0 = L.a_phi(phi).ldlt().solve(L.s_phi(phi));
    ComplexVector t1 = m.problem.a_phi(phi).ldlt().solve(m.problem.s_phi(phi));
    CHECK((t1 - t0 - td).norm() <= 1e-10 * (1.0 + t0.norm()));
    CHECK(m.problem.num_multipliers() == L.num_multipliers());
  }
  SUBCASE("outside Phi_eps") {
    RealVector phi = RealVector::Zero(static_cast<Eigen::Index>(L.num_multipliers()));
    phi(L.compact_index()) = -1.0;
    CHECK(error_of([&] { modify_source(L, phi, ComplexVector::Zero(L.dim())); }) ==
          ErrorCode::MultiplierOutsidePhiEps);
  }
}

TEST_CASE("bound_feedback") {
  CorpusInstance inst = gap_instance("gap-family-2");
  ScatteringProblem p = build_problem(inst);
  LagrangianProblem L = build_lagrangian(inst, p);
  CHECK(bound_feedback(L, L.objective(), std::numeric_limits<double>::infinity())
            .num_multipliers() == L.num_multipliers());

  RefinementTrace tr = run_restart_loop(L, {});
  REQUIRE(tr.final.kind == CertificateKind::StrongDual);
  LagrangianProblem aug = bound_feedback(L, tr.final_objective, tr.final.dual_value);
  REQUIRE(aug.num_multipliers() == L.num_multipliers() + 1);
  const Constraint& added = aug.constraints()[L.num_multipliers()];
  CHECK(added.kind == ConstraintKind::InequalityLE);
  for (const auto& [rho, t] : enumerate_designs(p)) CHECK(added.form(t) >= -1e-9 * tr.final.scale);

  DualSolution before = minimize_dual(L, {});
  DualSolution after = minimize_dual(aug, {});
  CHECK(after.state.value <= before.state.value + 1e-9 * before.scale);
  CHECK(after.state.value >= oracle_bound(p, L.objective()).value - 1e-8 * before.scale);
  CHECK(after.state.phi(static_cast<Eigen::Index>(L.num_multipliers())) >= 0.0);
}

TEST_CASE("restart loop") {
  SUBCASE("already strongly dual") {
    ScatteringProblem base = build_toy_problem(6, 3, 0.3, 0.5, 1);
    ScatteringProblem p(base.G(), base.v_diagonal(), base.partition(), ComplexVector::Zero(6),
                        base.eps_passivity());
    LagrangianProblem L =
        LagrangianProblem::with_eps_factor(QuadraticForm::zero(6), default_family(p, {}));
    RefinementTrace tr = run_restart_loop(L, {});
    CHECK(tr.final.kind == CertificateKind::StrongDual);
    REQUIRE(tr.iterations.size() == 1);
    CHECK(tr.iterations[0].source_modification.size() == 0);
  }
  SUBCASE("gap instances certify with decreasing violation") {
    for (const auto& inst : gap_corpus()) {
      CAPTURE(inst.name);
      ScatteringProblem p = build_problem(inst);
      LagrangianProblem L = build_lagrangian(inst, p);
      RefinementTrace tr = run_restart_loop(L, {});
      CHECK(tr.final.kind == CertificateKind::StrongDual);
      CHECK(tr.iterations.size() >= 2);
      CHECK(tr.iterations.size() <= 11);
      for (std::size_t k = 1; k < tr.iterations.size(); ++k) {
        CHECK(tr.iterations[k].max_violation < tr.iterations[k - 1].max_violation);
      }
    }
  }
  SUBCASE("restart cap") {
    CorpusInstance inst = gap_instance("gap-compact-2");
    ScatteringProblem p = build_problem(inst);
    RefinementConfig cfg;
    cfg.max_restarts = 0;
    RefinementTrace tr = run_restart_loop(build_lagrangian(inst, p), cfg);
    CHECK(tr.restart_cap_reached);
    CHECK(tr.final.kind == CertificateKind::GapSuspected);
    CHECK(tr.iterations.size() == 1);
  }
  SUBCASE("hybrid alpha and single shot") {
    CorpusInstance inst = gap_instance("gap-compact-0");
    ScatteringProblem p = build_problem(inst);
    LagrangianProblem L = build_lagrangian(inst, p);
    RefinementConfig cfg;
    cfg.hybrid_alpha = true;
    RefinementTrace tr = run_restart_loop(L, cfg);
    CHECK(tr.final.kind == CertificateKind::StrongDual);
    for (const auto& it : tr.iterations) CHECK(it.alpha <= 1.0);
    cfg.hybrid_alpha = false;
    cfg.single_shot = true;
    RefinementTrace ss = run_restart_loop(L, cfg);
    for (std::size_t k = 1; k < ss.iterations.size(); ++k) {
      CHECK(ss.iterations[k].max_violation < ss.iterations[k - 1].max_violation);
    }
  }
}
