#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "duality_bounds/dual_solver.hpp"
#include "duality_bounds/objectives.hpp"
#include "duality_bounds/scattering.hpp"

namespace duality_bounds {

struct ToyParams {
  Eigen::Index dim = 8;
  int blocks = 4;
  double loss = 0.3;
  double coupling = 0.5;
  std::uint64_t seed = 0;
};

struct CorpusInstance {
  std::string name;
  ToyParams params;
  std::vector<Design> backgrounds;
  ObjectiveKind objective = ObjectiveKind::Extinction;
  double strength = 1.0;
  bool compact_only = false;  // constraint set {f_dot} instead of the default family
};

/// Two nontrivial backgrounds for J blocks: the first block on, and the
/// last plus the middle block on.
std::vector<Design> standard_backgrounds(int blocks);

/// Twenty seeded toy instances with dim in {8, 12, 16} and J in {4, 5, 6}.
std::vector<CorpusInstance> regression_corpus();

/// Instances whose dual minimum sits on the edge of Phi_eps with violated
/// constraints at t*, used to exercise the restart loop.
std::vector<CorpusInstance> gap_corpus();

ScatteringProblem build_problem(const CorpusInstance& inst);
ConstraintSet build_constraints(const CorpusInstance& inst, const ScatteringProblem& p);
LagrangianProblem build_lagrangian(const CorpusInstance& inst, const ScatteringProblem& p,
                                   double eps_factor = 1e-6);

}  // namespace duality_bounds
