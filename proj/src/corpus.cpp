#include "duality_bounds/corpus.hpp"

#include "duality_bounds/constraints.hpp"

namespace duality_bounds {

std::vector<Design> standard_backgrounds(int blocks) {
  std::vector<std::uint8_t> first(blocks, 0);
  std::vector<std::uint8_t> last_mid(blocks, 0);
  first[0] = 1;
  last_mid[blocks - 1] = 1;
  last_mid[blocks / 2] = 1;
  return {Design(first), Design(last_mid)};
}

namespace {

ToyParams toy_params(std::uint64_t seed) {
  ToyParams t;
  t.dim = 8 + static_cast<Eigen::Index>(seed % 3) * 4;
  t.blocks = 4 + static_cast<int>(seed % 3);
  t.loss = 0.3;
  t.coupling = 0.5 + 0.1 * static_cast<double>(seed % 5);
  t.seed = seed;
  return t;
}

}  // namespace

std::vector<CorpusInstance> regression_corpus() {
  constexpr ObjectiveKind kinds[] = {ObjectiveKind::Extinction, ObjectiveKind::Absorption,
                                     ObjectiveKind::Scattering};
  std::vector<CorpusInstance> out;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CorpusInstance inst;
    inst.params = toy_params(seed);
    inst.backgrounds = standard_backgrounds(inst.params.blocks);
    inst.objective = kinds[seed % 3];
    inst.name = "toy-" + std::to_string(seed) + "-" + std::string(to_string(inst.objective));
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<CorpusInstance> gap_corpus() {
  std::vector<CorpusInstance> out;
  for (std::uint64_t seed : {0, 1, 2}) {
    CorpusInstance inst;
    inst.params = toy_params(seed);
    inst.backgrounds = standard_backgrounds(inst.params.blocks);
    inst.objective = ObjectiveKind::CompactBoundary;
    inst.compact_only = true;
    inst.name = "gap-compact-" + std::to_string(seed);
    out.push_back(std::move(inst));
  }
  for (std::uint64_t seed : {0, 2, 3}) {
    CorpusInstance inst;
    inst.params = toy_params(seed);
    inst.backgrounds = standard_backgrounds(inst.params.blocks);
    inst.objective = ObjectiveKind::CompactBoundary;
    inst.name = "gap-family-" + std::to_string(seed);
    out.push_back(std::move(inst));
  }
  return out;
}

ScatteringProblem build_problem(const CorpusInstance& inst) {
  const ToyParams& t = inst.params;
  return build_toy_problem(t.dim, t.blocks, t.loss, t.coupling, t.seed);
}

ConstraintSet build_constraints(const CorpusInstance& inst, const ScatteringProblem& p) {
  if (inst.compact_only) return ConstraintSet({compact_constraint(p)}, 0);
  return default_family(p, inst.backgrounds);
}

LagrangianProblem build_lagrangian(const CorpusInstance& inst, const ScatteringProblem& p,
                                   double eps_factor) {
  return LagrangianProblem::with_eps_factor(
      make_objective(p, inst.objective, inst.strength, inst.params.seed),
      build_constraints(inst, p), eps_factor);
}

}  // namespace duality_bounds
