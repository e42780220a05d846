#include "doctest.h"
#include "support.hpp"

using namespace duality_bounds;
using testing::error_of;

TEST_CASE("scalar toy problem") {
  ScatteringProblem p = build_toy_problem(1, 1, 0.5, 0.0, 0);
  CHECK(p.dim() == 1);
  CHECK(p.num_blocks() == 1);
  // Zero coupling leaves only the radiative term, normalized to gamma k^2 = 1/4.
  CHECK(std::abs(p.G()(0, 0) - Complex(0.0, 0.25)) < 1e-15);
  CHECK(std::abs(1.0 / p.v_diagonal()(0) - Complex(1.0, -0.5)) < 1e-15);
  CHECK(std::abs(p.s()(0)) == doctest::Approx(1.0));

  ComplexVector t = solve_design(p, Design::all_one(1));
  Complex expect = p.s()(0) / (1.0 / p.v_diagonal()(0) - p.G()(0, 0));
  CHECK(std::abs(t(0) - expect) < 1e-15);
  CHECK(solve_design(p, Design::all_zero(1)).norm() == 0.0);
}

TEST_CASE("toy generation is deterministic and passive") {
  ScatteringProblem a = build_toy_problem(10, 3, 0.3, 0.7, 42);
  ScatteringProblem b = build_toy_problem(10, 3, 0.3, 0.7, 42);
  CHECK(a.G() == b.G());
  CHECK(a.s() == b.s());
  CHECK(a.resistive_lambda_min() > a.eps_passivity());
  CHECK(error_of([] { build_toy_problem(4, 2, 0.0, 0.5, 1); }) == ErrorCode::PassivityViolation);
}

TEST_CASE("lossless potential fails passivity") {
  ComplexMatrix g = Complex(0.0, 0.1) * ComplexMatrix::Identity(2, 2);
  ComplexVector v = ComplexVector::Ones(2);
  CHECK(error_of([&] {
          ScatteringProblem(g, v, DesignPartition::contiguous(2, 1), ComplexVector::Ones(2), 0.05);
        }) == ErrorCode::PassivityViolation);
}

TEST_CASE("partition validation") {
  CHECK(error_of([] { DesignPartition(3, {{0}, {0, 1, 2}}); }) == ErrorCode::InvalidPartition);
  CHECK(error_of([] { DesignPartition(3, {{0}, {1}}); }) == ErrorCode::InvalidPartition);
  CHECK(error_of([] { DesignPartition(2, {{0}, {}, {1}}); }) == ErrorCode::InvalidPartition);
  DesignPartition part = DesignPartition::contiguous(7, 3);
  CHECK(part.block(0).size() == 3);
  CHECK(part.block(2).size() == 2);
  CHECK(part.block_of(6) == 2);
}

TEST_CASE("designs") {
  CHECK(Design::from_string("0101").to_string() == "0101");
  CHECK(Design::from_index(5, 4).to_string() == "0101");
  CHECK_FALSE(Design::all_zero(3).any());
  CHECK(error_of([] { Design::from_string("012"); }) == ErrorCode::InvalidDesign);
  ScatteringProblem p = build_toy_problem(6, 3, 0.3, 0.5, 2);
  CHECK(error_of([&] { solve_design(p, Design::all_one(2)); }) == ErrorCode::InvalidDesign);
}

TEST_CASE("solve_design matches a dense masked solve") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    ScatteringProblem p = build_toy_problem(9, 4, 0.3, 0.6, seed);
    for (std::uint64_t idx = 0; idx < 16; ++idx) {
      Design rho = Design::from_index(idx, 4);
      ComplexVector t = solve_design(p, rho);
      CHECK((t - testing::dense_design_solve(p, rho)).norm() < 1e-12 * (1.0 + t.norm()));
    }
  }
}

TEST_CASE("enumerate_designs") {
  CHECK(enumerate_designs(build_toy_problem(2, 1, 0.3, 0.5, 0)).size() == 2);
  ScatteringProblem p = build_toy_problem(6, 3, 0.3, 0.5, 0);
  DesignRange range = enumerate_designs(p);
  CHECK(range.size() == 8);
  std::uint64_t k = 0;
  for (const auto& [rho, t] : range) {
    CHECK(rho == Design::from_index(k, 3));
    CHECK((t - solve_design(p, rho)).norm() == 0.0);
    ++k;
  }
  CHECK(k == 8);
  ScatteringProblem big = build_toy_problem(21, 21, 0.3, 0.5, 0);
  CHECK(error_of([&] { enumerate_designs(big); }) == ErrorCode::EnumerationCap);
}

TEST_CASE("background_operators") {
  ScatteringProblem p = build_toy_problem(8, 4, 0.3, 0.5, 3);
  const ComplexMatrix id = ComplexMatrix::Identity(8, 8);
  SUBCASE("empty background") {
    auto ops = background_operators(p, Design::all_zero(4));
    CHECK(ops.Vb.norm() == 0.0);
    CHECK(ops.Vc.isApprox(p.V()));
    CHECK(ops.Wb_inv == id);
  }
  SUBCASE("full background") {
    auto ops = background_operators(p, Design::all_one(4));
    CHECK(ops.Vc.norm() == 0.0);
    CHECK(ops.Vb.isApprox(p.V()));
    CHECK(ops.Wc_inv == id);
  }
  SUBCASE("the two halves add up to V") {
    auto ops = background_operators(p, Design::from_string("0110"));
    CHECK((ops.Vb + ops.Vc - p.V()).norm() < 1e-15);
  }
}

TEST_CASE("build_U") {
  ScatteringProblem p = build_toy_problem(8, 4, 0.3, 0.5, 1);
  ComplexMatrix u = build_U(p);
  CHECK((u - (p.Vinv() - p.G())).norm() < 1e-15);
  CHECK(lambda_min(hermitian_part(Complex(0, 1) * u)) > p.eps_passivity());
}
