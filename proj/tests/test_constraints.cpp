#include "doctest.h"
#include "support.hpp"

using namespace duality_bounds;
using testing::error_of;

namespace {

ComplexMatrix block_scalar(const ScatteringProblem& p, int j, Complex c) {
  return c * p.partition().projector(j);
}

double design_residual(const Constraint& c, const ScatteringProblem& p) {
  double worst = 0.0;
  for (const auto& [rho, t] : enumerate_designs(p)) {
    double sc = constraint_scale(c.form, t);
    if (sc > 0.0) worst = std::max(worst, std::abs(c.form(t)) / sc);
  }
  return worst;
}

}  // namespace

TEST_CASE("compact constraint") {
  ScatteringProblem p = build_toy_problem(8, 4, 0.3, 0.5, 4);
  Constraint c = compact_constraint(p);
  CHECK(c.kind == ConstraintKind::Equality);
  CHECK(c.form.v() == 0.0);
  CHECK((c.form.s() - Complex(0, 0.5) * p.s()).norm() < 1e-15);
  CHECK(definiteness(c.form.a(), p.eps_passivity()) == Definiteness::PositiveDefiniteEps);
  CHECK(c.form(ComplexVector::Zero(8)) == 0.0);

  ComplexVector peak = c.form.a().ldlt().solve(c.form.s());
  double top = std::real(c.form.s().dot(peak));
  CHECK(top > 0.0);
  CHECK(c.form(peak) == doctest::Approx(top).epsilon(1e-12));

  CHECK(design_residual(c, p) <= 1e-9);
}

TEST_CASE("simple schema") {
  ScatteringProblem p = build_toy_problem(8, 4, 0.3, 0.5, 5);
  SUBCASE("P = 0 gives the zero constraint") {
    Constraint z = gen_constraint_simple(p, ComplexMatrix::Zero(8, 8));
    CHECK(z.form.s().norm() == 0.0);
    CHECK(z.form.a().norm() == 0.0);
  }
  SUBCASE("P = iI reproduces the compact constraint") {
    Constraint c = gen_constraint_simple(p, Complex(0, 1) * ComplexMatrix::Identity(8, 8));
    Constraint d = compact_constraint(p);
    CHECK((c.form.s() - d.form.s()).norm() < 1e-14);
    CHECK((c.form.a() - d.form.a()).norm() < 1e-14);
  }
  SUBCASE("off-block P is rejected") {
    ComplexMatrix P = ComplexMatrix::Zero(8, 8);
    P(0, 7) = 1.0;
    CHECK(error_of([&] { gen_constraint_simple(p, P); }) == ErrorCode::NotBlockDiagonal);
  }
  SUBCASE("random block-diagonal P vanishes on designs") {
    std::mt19937_64 rng(8);
    ComplexMatrix P = ComplexMatrix::Zero(8, 8);
    for (int j = 0; j < 4; ++j) {
      ComplexMatrix r = testing::random_matrix(8, rng);
      ComplexMatrix pj = p.partition().projector(j);
      P += pj * r * pj;
    }
    CHECK(design_residual(gen_constraint_simple(p, P), p) <= 1e-9);
  }
}

TEST_CASE("background schema") {
  ScatteringProblem p = build_toy_problem(8, 4, 0.3, 0.5, 6);
  std::mt19937_64 rng(12);
  SUBCASE("empty background reduces to the simple schema with P V") {
    ComplexMatrix P = ComplexMatrix::Zero(8, 8);
    for (int j = 0; j < 4; ++j) {
      ComplexMatrix pj = p.partition().projector(j);
      P += pj * testing::random_matrix(8, rng) * pj;
    }
    Constraint bg = gen_constraint_background(p, P, Design::all_zero(4));
    Constraint simple = gen_constraint_simple(p, P * p.V());
    CHECK((bg.form.s() - simple.form.s()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((bg.form.a() - simple.form.a()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("P = 0 gives the zero constraint") {
    Constraint z = gen_constraint_background(p, ComplexMatrix::Zero(8, 8), Design::from_string("1010"));
    CHECK(z.form.s().norm() == 0.0);
    CHECK(z.form.a().norm() == 0.0);
  }
  SUBCASE("block projectors under random backgrounds vanish on designs") {
    for (int trial = 0; trial < 4; ++trial) {
      Design b = testing::random_design(4, rng);
      for (int j = 0; j < 4; ++j) {
        for (Complex c : {Complex(1.0), Complex(0.0, 1.0)}) {
          CHECK(design_residual(gen_constraint_background(p, block_scalar(p, j, c), b), p) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("default family") {
  ScatteringProblem p2 = build_toy_problem(4, 2, 0.3, 0.5, 0);
  ConstraintSet plain = default_family(p2, {});
  CHECK(plain.size() == 5);
  CHECK(plain.compact_index() == 0);
  for (std::size_t k = 0; k < plain.size(); ++k) {
    if (k == plain.compact_index()) continue;
    CHECK(hermitian_operator_norm(plain[k].form.a()) == doctest::Approx(1.0));
  }

  ScatteringProblem p = build_toy_problem(8, 4, 0.3, 0.6, 1);
  const std::size_t base = default_family(p, {}).size();
  CHECK(default_family(p, {Design::all_one(4)}).size() > base);

  ConstraintSet fam = default_family(p, {Design::from_string("1000"), Design::from_string("0101")});
  ValidityReport r = validate_on_designs(fam, p, 1e-8);
  CHECK(r.pass);
  CHECK(r.designs_checked == 16);
}

TEST_CASE("validate_on_designs catches a corrupted constraint") {
  ScatteringProblem p = build_toy_problem(8, 4, 0.3, 0.5, 2);
  ConstraintSet fam = default_family(p, {Design::from_string("1000")});
  std::vector<Constraint> cs = fam.constraints();
  const std::size_t bad = 3;
  cs[bad].form = QuadraticForm(cs[bad].form.s() * 1.01, cs[bad].form.a(), 0.0);
  ValidityReport r = validate_on_designs(ConstraintSet(cs, fam.compact_index()), p, 1e-8);
  CHECK_FALSE(r.pass);
  REQUIRE(r.worst_constraint);
  CHECK(*r.worst_constraint == bad);
  REQUIRE(r.worst_design);
  CHECK(r.worst_design->any());
}

TEST_CASE("single-design enumeration only sees t = 0 off the active block") {
  ScatteringProblem p = build_toy_problem(3, 1, 0.3, 0.5, 0);
  ValidityReport r = validate_on_designs(default_family(p, {}), p, 1e-8);
  CHECK(r.pass);
  CHECK(r.designs_checked == 2);
}

TEST_CASE("constraint set invariants") {
  ScatteringProblem p = build_toy_problem(4, 2, 0.3, 0.5, 0);
  Constraint c = compact_constraint(p);
  Constraint other = gen_constraint_simple(p, p.partition().projector(0));
  CHECK(error_of([&] { ConstraintSet({c}, 3); }) == ErrorCode::InvalidInput);
  CHECK(error_of([&] { ConstraintSet({other}, 0); }) == ErrorCode::PassivityViolation);
  ConstraintSet cs({other, c}, 1);
  CHECK(cs.compact().label == c.label);
  CHECK(cs.with(other).size() == 3);
}

TEST_CASE("feasible set lies in the passivity ball") {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ScatteringProblem p = build_toy_problem(6, 3, 0.3, 0.5, seed);
    Constraint c = compact_constraint(p);
    const double radius = 2.0 * c.form.s().norm() / p.eps_passivity();
    for (int k = 0; k < 50; ++k) {
      // Boundary point along a random ray: largest r with f(r u) >= 0.
      ComplexVector u = testing::random_vector(6, rng);
      u /= u.norm();
      const double lin = 2.0 * std::real(u.dot(c.form.s()));
      const double quad = std::real(u.dot(c.form.a() * u));
      const double r = std::max(lin, 0.0) / quad;
      CHECK(c.form(r * u) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
      CHECK(r <= radius);
    }
  }
}
