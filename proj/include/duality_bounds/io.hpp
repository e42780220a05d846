#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "duality_bounds/constraints.hpp"
#include "duality_bounds/dual_solver.hpp"
#include "duality_bounds/refinement.hpp"
#include "duality_bounds/scattering.hpp"
#include "duality_bounds/verification.hpp"

namespace duality_bounds {

using Json = nlohmann::json;

// Doubles are written in shortest round-trip form, so decode(encode(x)) is
// bit-exact. Non-finite values are spelled "inf", "-inf" and "nan".
Json encode(double x);
double decode_double(const Json& j);

Json encode(const RealVector& v);
Json encode(const ComplexVector& v);
Json encode(const ComplexMatrix& m);
Json encode(const Design& d);
Json encode(const QuadraticForm& f);
Json encode(const Constraint& c);
Json encode(const ConstraintSet& cs);
Json encode(const ScatteringProblem& p);
Json encode(const SolverConfig& cfg);
Json encode(const RestoreConfig& cfg);
Json encode(const RefinementConfig& cfg);
Json encode(const DualState& st);
Json encode(const DualSolution& sol);
Json encode(const Certificate& c);
Json encode(const RefinementTrace& tr);
Json encode(const ValidityReport& r);
Json encode(const FdReport& r);
Json encode(const CombinationReport& r);
Json encode(const ViolationBoundReport& r);
Json encode(const MinimaxReport& r);
Json encode(const QMembership& q);

RealVector decode_real_vector(const Json& j);
ComplexVector decode_complex_vector(const Json& j);
ComplexMatrix decode_complex_matrix(const Json& j);
QuadraticForm decode_quadratic_form(const Json& j);
Constraint decode_constraint(const Json& j);
ConstraintSet decode_constraint_set(const Json& j);
ScatteringProblem decode_problem(const Json& j);
SolverConfig decode_solver_config(const Json& j);
RestoreConfig decode_restore_config(const Json& j);
RefinementConfig decode_refinement_config(const Json& j);
RefinementTrace decode_refinement_trace(const Json& j);

/// Throws InvalidInput when the file is missing or not valid JSON.
Json read_json_file(const std::filesystem::path& path);
/// Two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace duality_bounds
