// Randomized invariants. Each generator is seeded so failures reproduce.
#include "doctest.h"
#include "support.hpp"

#include "duality_bounds/corpus.hpp"
#include "duality_bounds/objectives.hpp"
#include "duality_bounds/refinement.hpp"
#include "duality_bounds/verification.hpp"

using namespace duality_bounds;

namespace {

struct RandomToy {
  ScatteringProblem p;
  std::vector<Design> backgrounds;
  ObjectiveKind kind;
};

RandomToy random_toy(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(2, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = dim(rng);
  const int blocks = 1 + static_cast<int>(rng() % std::min(n, 5));
  ScatteringProblem p = build_toy_problem(n, blocks, 0.1 + 0.5 * u(rng), 1.2 * u(rng), rng());
  std::vector<Design> bgs;
  for (int k = 0; k < 2; ++k) bgs.push_back(testing::random_design(blocks, rng));
  constexpr ObjectiveKind kinds[] = {ObjectiveKind::Extinction, ObjectiveKind::Absorption,
                                     ObjectiveKind::Scattering};
  return {std::move(p), std::move(bgs), kinds[rng() % 3]};
}

}  // namespace

TEST_CASE("property: forms are affine in their coefficients") {
  std::mt19937_64 rng(1001);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 6);
    QuadraticForm f = testing::random_form(n, rng), g = testing::random_form(n, rng);
    std::normal_distribution<double> c(0.0, 2.0);
    std::vector<double> w = {c(rng), c(rng)};
    std::vector<QuadraticForm> fs = {f, g};
    ComplexVector t = testing::random_vector(n, rng);
    const double lhs = combine_forms(w, fs)(t);
    const double rhs = w[0] * f(t) + w[1] * g(t);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11).scale(1.0 + std::abs(rhs)));
    CHECK(f.scaled(-1.0)(t) == doctest::Approx(-f(t)).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("property: generated constraints vanish on every design") {
  std::mt19937_64 rng(1002);
  for (int trial = 0; trial < 25; ++trial) {
    RandomToy rt = random_toy(rng);
    ConstraintSet cs = default_family(rt.p, rt.backgrounds);
    ValidityReport r = validate_on_designs(cs, rt.p, 1e-8);
    CHECK(r.pass);
    CHECK(r.designs_checked == (1u << rt.p.num_blocks()));
  }
}

TEST_CASE("property: the compact constraint bounds t inside the passivity ball") {
  std::mt19937_64 rng(1003);
  for (int trial = 0; trial < 25; ++trial) {
    RandomToy rt = random_toy(rng);
    Constraint c = compact_constraint(rt.p);
    const double radius = 2.0 * c.form.s().norm() / rt.p.eps_passivity();
    for (const auto& [rho, t] : enumerate_designs(rt.p)) CHECK(t.norm() <= radius);
  }
}

TEST_CASE("property: weak duality at random multipliers") {
  std::mt19937_64 rng(1004);
  for (int trial = 0; trial < 15; ++trial) {
    RandomToy rt = random_toy(rng);
    LagrangianProblem L = LagrangianProblem::with_eps_factor(
        make_objective(rt.p, rt.kind), default_family(rt.p, rt.backgrounds));
    const double oracle = oracle_bound(rt.p, L.objective()).value;
    const double scale = dual_scale(L);
    for (int k = 0; k < 20; ++k) {
      DualState st = eval_dual(L, sample_phi_eps(L, rng));
      CHECK(st.value >= oracle - 1e-8 * scale);
    }
  }
}

TEST_CASE("property: lifted maximizers sit on the boundary of C") {
  std::mt19937_64 rng(1005);
  int lifted = 0;
  for (int trial = 0; trial < 15; ++trial) {
    RandomToy rt = random_toy(rng);
    LagrangianProblem L = LagrangianProblem::with_eps_factor(
        make_objective(rt.p, rt.kind), default_family(rt.p, rt.backgrounds));
    const QuadraticForm& fc = L.constraints().compact().form;
    for (int k = 0; k < 20; ++k) {
      DualState st = eval_dual(L, sample_phi_eps(L, rng));
      const double norm = constraint_scale(fc, st.t_star);
      CHECK(fc(st.t_star) >= -kLiftTolerance * std::max(norm, 1e-300));
      if (st.status != DualStatus::Lifted) continue;
      ++lifted;
      CHECK(std::abs(fc(st.t_star)) <= kLiftTolerance * norm);
    }
  }
  CHECK(lifted > 0);
}

TEST_CASE("property: dual Hessians are symmetric positive semidefinite") {
  std::mt19937_64 rng(1006);
  for (int trial = 0; trial < 10; ++trial) {
    RandomToy rt = random_toy(rng);
    LagrangianProblem L = LagrangianProblem::with_eps_factor(
        make_objective(rt.p, rt.kind), default_family(rt.p, rt.backgrounds));
    for (int k = 0; k < 10; ++k) {
      RealVector phi = sample_phi_eps(L, rng);
      phi(L.compact_index()) += 0.1;
      DualState st = eval_dual(L, phi);
      if (st.status != DualStatus::Interior) continue;
      RealMatrix H = dual_hessian(st, L);
      CHECK((H - H.transpose()).norm() <= 1e-12 * (1.0 + H.norm()));
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(H);
      CHECK(es.eigenvalues()(0) >= -1e-8 * es.eigenvalues().cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("property: compact subtraction keeps feasible values") {
  std::mt19937_64 rng(1007);
  for (int trial = 0; trial < 20; ++trial) {
    RandomToy rt = random_toy(rng);
    QuadraticForm f = make_objective(rt.p, rt.kind);
    Constraint fc = compact_constraint(rt.p);
    QuadraticForm g = subtract_compact(f, fc, 0.1 + 3.0 * std::uniform_real_distribution<double>()(rng));
    for (const auto& [rho, t] : enumerate_designs(rt.p)) {
      CHECK(g(t) == doctest::Approx(f(t)).epsilon(1e-11).scale(1.0));
    }
  }
}

TEST_CASE("property: sampled combinations lie in the cone") {
  std::mt19937_64 rng(1008);
  for (int trial = 0; trial < 10; ++trial) {
    RandomToy rt = random_toy(rng);
    LagrangianProblem L = LagrangianProblem::with_eps_factor(
        make_objective(rt.p, rt.kind), default_family(rt.p, rt.backgrounds));
    for (int k = 0; k < 20; ++k) {
      RealVector psi = sample_combination(L, rng);
      const ComplexMatrix a = L.combination(psi).a();
      CHECK(lambda_min(a) >= L.eps() - 1e-10 * hermitian_operator_norm(a));
      RealVector phi = sample_phi_eps(L, rng);
      const ComplexMatrix ap = L.a_phi(phi);
      CHECK(lambda_min(ap) >= L.eps() - 1e-10 * hermitian_operator_norm(ap));
    }
  }
}
