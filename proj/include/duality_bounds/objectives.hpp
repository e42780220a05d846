#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "duality_bounds/quadratic_form.hpp"
#include "duality_bounds/scattering.hpp"

namespace duality_bounds {

/// Figures of merit over the polarization t, all with zero constant part.
enum class ObjectiveKind {
  Zero,        // f = 0
  Extinction,  // -Im(t^dagger s): power drawn from the incident field
  Absorption,  // t^dagger (i V^{-1})^h t
  Scattering,  // -t^dagger (i G)^h t
  // beta |w^dagger t|^2 with w chosen so the Lagrangian maximizer never
  // reaches the resistive-power boundary; the dual minimum then sits on the
  // edge of the multiplier domain (used to exercise the refinement loop).
  CompactBoundary,
};

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(std::string_view name);

QuadraticForm make_objective(const ScatteringProblem& p, ObjectiveKind kind,
                             double strength = 1.0, std::uint64_t seed = 0);

}  // namespace duality_bounds
