#include "doctest.h"
#include "support.hpp"

using namespace duality_bounds;
using testing::error_of;

TEST_CASE("eval_form on a unit vector") {
  ComplexVector e1 = ComplexVector::Unit(3, 0);
  QuadraticForm f(e1, ComplexMatrix::Identity(3, 3), 1.0);
  CHECK(eval_form(f, e1) == doctest::Approx(2.0));
  CHECK(f(ComplexVector::Zero(3)) == doctest::Approx(1.0));
}

TEST_CASE("eval_form agrees with the elementwise sum") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 9);
    QuadraticForm f = testing::random_form(n, rng);
    ComplexVector t = testing::random_vector(n, rng);
    double expect = testing::naive_eval(f.s(), f.a(), f.v(), t);
    CHECK(f(t) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("constructor rejects non-Hermitian and mismatched input") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK(error_of([&] { QuadraticForm(ComplexVector::Zero(2), m); }) == ErrorCode::NotHermitian);
  CHECK(error_of([&] { QuadraticForm(ComplexVector::Zero(3), ComplexMatrix::Identity(2, 2)); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(error_of([&] {
          QuadraticForm f(ComplexVector::Zero(2), ComplexMatrix::Identity(2, 2));
          eval_form(f, ComplexVector::Zero(3));
        }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("tiny asymmetry is symmetrized away") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = 1e-12;
  QuadraticForm f(ComplexVector::Zero(2), m);
  CHECK(f.a()(0, 1) == f.a()(1, 0));
}

TEST_CASE("hermitian_split") {
  SUBCASE("identity is all Hermitian") {
    auto sp = hermitian_split(ComplexMatrix::Identity(3, 3));
    CHECK(sp.hermitian.isApprox(ComplexMatrix::Identity(3, 3)));
    CHECK(sp.skew.norm() == 0.0);
  }
  SUBCASE("iI is all skew") {
    ComplexMatrix m = Complex(0, 1) * ComplexMatrix::Identity(3, 3);
    auto sp = hermitian_split(m);
    CHECK(sp.hermitian.norm() == 0.0);
    CHECK(sp.skew.isApprox(m));
  }
  SUBCASE("random reconstruction") {
    std::mt19937_64 rng(3);
    ComplexMatrix m = testing::random_matrix(5, rng);
    auto sp = hermitian_split(m);
    CHECK((sp.hermitian + sp.skew - m).norm() < 1e-14);
    CHECK((sp.hermitian - sp.hermitian.adjoint()).norm() < 1e-14);
    CHECK((sp.skew + sp.skew.adjoint()).norm() < 1e-14);
  }
}

TEST_CASE("definiteness") {
  CHECK(definiteness(2.0 * ComplexMatrix::Identity(3, 3), 1.0) ==
        Definiteness::PositiveDefiniteEps);
  RealVector d(2);
  d << 1.0, -1.0;
  CHECK(definiteness(d.cast<Complex>().asDiagonal(), 0.0) == Definiteness::Below);
  const double eps = 0.25;
  CHECK(definiteness(eps * ComplexMatrix::Identity(4, 4), eps) ==
        Definiteness::PositiveSemidefiniteEps);
}

TEST_CASE("combine_forms is linear") {
  std::mt19937_64 rng(5);
  std::vector<QuadraticForm> forms;
  for (int k = 0; k < 3; ++k) forms.push_back(testing::random_form(4, rng));
  std::vector<double> c = {0.5, -2.0, 1.25};
  QuadraticForm combo = combine_forms(c, forms);
  ComplexVector t = testing::random_vector(4, rng);
  double expect = 0.0;
  for (int k = 0; k < 3; ++k) expect += c[k] * forms[k](t);
  CHECK(combo(t) == doctest::Approx(expect).epsilon(1e-12));
  std::vector<double> bad = {1.0};
  CHECK(error_of([&] { combine_forms(bad, forms); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("solve_hermitian") {
  SUBCASE("singular diagonal uses the pseudo-inverse") {
    RealVector d(2);
    d << 1.0, 0.0;
    ComplexMatrix a = d.cast<Complex>().asDiagonal();
    ComplexVector b(2);
    b << 3.0, 5.0;
    auto r = solve_hermitian(a, b);
    CHECK(r.pseudo_inverse_used);
    CHECK(std::abs(r.x(0) - Complex(3.0)) < 1e-14);
    CHECK(std::abs(r.x(1)) < 1e-14);
  }
  SUBCASE("definite system is solved exactly") {
    std::mt19937_64 rng(9);
    ComplexMatrix a = testing::random_spd(6, rng);
    ComplexVector b = testing::random_vector(6, rng);
    auto r = solve_hermitian(a, b);
    CHECK_FALSE(r.pseudo_inverse_used);
    CHECK((a * r.x - b).norm() < 1e-12);
  }
  SUBCASE("indefinite input is rejected") {
    RealVector d(2);
    d << 1.0, -1.0;
    ComplexMatrix a = d.cast<Complex>().asDiagonal();
    CHECK(error_of([&] { solve_hermitian(a, ComplexVector::Ones(2)); }) ==
          ErrorCode::IndefiniteMatrix);
  }
}
