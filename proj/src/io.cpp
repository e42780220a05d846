#include "duality_bounds/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "duality_bounds/errors.hpp"

namespace duality_bounds {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidInput, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("field '") + key + "': " + e.what());
  }
}

std::vector<double> doubles(const Json& j) {
  if (!j.is_array()) bad("expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(decode_double(x));
  return out;
}

Json encode_all(const RealVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(encode(v(i)));
  return a;
}

std::string_view to_string(ConstraintKind k) {
  return k == ConstraintKind::Equality ? "equality" : "inequality";
}

template <typename Enum, std::size_t N>
Enum parse_enum(const Json& j, const Enum (&values)[N], const char* what) {
  const std::string s = j.is_string() ? j.get<std::string>() : std::string();
  for (Enum e : values) {
    if (to_string(e) == s) return e;
  }
  bad(std::string("unknown ") + what + " '" + s + "'");
}

constexpr Termination kTerminations[] = {Termination::GradientTolerance,
                                         Termination::EpsBoundary, Termination::Stalled};
constexpr DualStatus kStatuses[] = {DualStatus::Interior, DualStatus::OnEpsBoundary,
                                    DualStatus::Lifted};
constexpr CertificateKind kCertKinds[] = {CertificateKind::StrongDual,
                                          CertificateKind::GapSuspected};

constexpr ConstraintKind kConstraintKinds[] = {ConstraintKind::Equality,
                                               ConstraintKind::InequalityLE};

DualState decode_state(const Json& j) {
  DualState st;
  st.phi = decode_real_vector(field(j, "phi"));
  st.lift_alpha = decode_double(field(j, "lift_alpha"));
  st.t_star = decode_complex_vector(field(j, "t_star"));
  st.value = decode_double(field(j, "value"));
  st.grad = decode_real_vector(field(j, "grad"));
  st.lambda_min = decode_double(field(j, "lambda_min"));
  st.status = parse_enum(field(j, "status"), kStatuses, "dual status");
  return st;
}

DualSolution decode_solution(const Json& j) {
  DualSolution sol;
  sol.state = decode_state(field(j, "state"));
  sol.termination = parse_enum(field(j, "termination"), kTerminations, "termination");
  sol.iterations = get<int>(j, "iterations");
  sol.scale = decode_double(field(j, "scale"));
  sol.projected_grad_norm = decode_double(field(j, "projected_grad_norm"));
  sol.values = doubles(field(j, "values"));
  return sol;
}

Certificate decode_certificate(const Json& j) {
  Certificate c;
  c.kind = parse_enum(field(j, "kind"), kCertKinds, "certificate kind");
  c.residuals = decode_real_vector(field(j, "residuals"));
  c.max_violation = decode_double(field(j, "max_violation"));
  c.primal_value = decode_double(field(j, "primal_value"));
  c.dual_value = decode_double(field(j, "dual_value"));
  c.gap = decode_double(field(j, "gap"));
  c.scale = decode_double(field(j, "scale"));
  return c;
}

}  // namespace

Json encode(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double decode_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  bad("expected a number, got " + j.dump());
}

Json encode(const RealVector& v) { return encode_all(v); }

Json encode(const ComplexVector& v) {
  return {{"re", encode_all(v.real())}, {"im", encode_all(v.imag())}};
}

Json encode(const ComplexMatrix& m) {
  // Row-major.
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(encode(m(r, c).real()));
      im.push_back(encode(m(r, c).imag()));
    }
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

Json encode(const Design& d) { return d.to_string(); }

Json encode(const QuadraticForm& f) {
  return {{"s", encode(f.s())}, {"a", encode(f.a())}, {"v", encode(f.v())}};
}

Json encode(const Constraint& c) {
  return {{"label", c.label},
          {"kind", to_string(c.kind)},
          {"s", encode(c.form.s())},
          {"A", encode(c.form.a())},
          {"v", encode(c.form.v())}};
}

Json encode(const ConstraintSet& cs) {
  Json list = Json::array();
  for (std::size_t k = 0; k < cs.size(); ++k) {
    Json c = encode(cs[k]);
    c["compact"] = k == cs.compact_index();
    list.push_back(std::move(c));
  }
  return {{"format", "duality-bounds/constraints"}, {"constraints", list}};
}

Json encode(const ScatteringProblem& p) {
  Json blocks = Json::array();
  for (const auto& b : p.partition().blocks()) blocks.push_back(b);
  return {{"format", "duality-bounds/problem"},
          {"dim", p.dim()},
          {"J", p.num_blocks()},
          {"G", encode(p.G())},
          {"v_diagonal", encode(p.v_diagonal())},
          {"blocks", blocks},
          {"s", encode(p.s())},
          {"eps_passivity", encode(p.eps_passivity())},
          {"seed", p.seed()}};
}

Json encode(const SolverConfig& cfg) {
  return {{"eps_factor", encode(cfg.eps_factor)},
          {"grad_tol", encode(cfg.grad_tol)},
          {"max_iters", cfg.max_iters},
          {"seed", cfg.seed}};
}

Json encode(const RestoreConfig& cfg) {
  return {{"stages", cfg.stages},
          {"penalty_growth", encode(cfg.penalty_growth)},
          {"inner_steps", cfg.inner_steps},
          {"seed", cfg.seed}};
}

Json encode(const RefinementConfig& cfg) {
  return {{"solver", encode(cfg.solver)},         {"cert_tol", encode(cfg.cert_tol)},
          {"max_restarts", cfg.max_restarts},     {"a_obj", encode(cfg.a_obj)},
          {"single_shot", cfg.single_shot},       {"hybrid_alpha", cfg.hybrid_alpha},
          {"alpha_steps", cfg.alpha_steps},       {"restore", encode(cfg.restore)}};
}

Json encode(const DualState& st) {
  return {{"phi", encode(st.phi)},
          {"lift_alpha", encode(st.lift_alpha)},
          {"t_star", encode(st.t_star)},
          {"value", encode(st.value)},
          {"grad", encode(st.grad)},
          {"lambda_min", encode(st.lambda_min)},
          {"status", to_string(st.status)}};
}

Json encode(const DualSolution& sol) {
  Json values = Json::array();
  for (double v : sol.values) values.push_back(encode(v));
  return {{"state", encode(sol.state)},
          {"termination", to_string(sol.termination)},
          {"iterations", sol.iterations},
          {"scale", encode(sol.scale)},
          {"projected_grad_norm", encode(sol.projected_grad_norm)},
          {"values", values}};
}

Json encode(const Certificate& c) {
  return {{"kind", to_string(c.kind)},
          {"residuals", encode(c.residuals)},
          {"max_violation", encode(c.max_violation)},
          {"primal_value", encode(c.primal_value)},
          {"dual_value", encode(c.dual_value)},
          {"gap", encode(c.gap)},
          {"scale", encode(c.scale)}};
}

Json encode(const RefinementTrace& tr) {
  Json steps = Json::array();
  for (const auto& s : tr.iterations) {
    steps.push_back({{"source_modification", encode(s.source_modification)},
                     {"alpha", encode(s.alpha)},
                     {"dual_value", encode(s.dual_value)},
                     {"max_violation", encode(s.max_violation)},
                     {"termination", to_string(s.termination)},
                     {"solver_iterations", s.solver_iterations}});
  }
  return {{"format", "duality-bounds/refinement-trace"},
          {"iterations", steps},
          {"final", encode(tr.final)},
          {"final_objective", encode(tr.final_objective)},
          {"final_solution", encode(tr.final_solution)},
          {"restart_cap_reached", tr.restart_cap_reached},
          {"progress_stalled", tr.progress_stalled}};
}

Json encode(const ValidityReport& r) {
  Json j = {{"check", "constraint-validity"},
            {"pass", r.pass},
            {"max_normalized", encode(r.max_normalized)},
            {"tolerance", encode(r.tolerance)},
            {"designs_checked", r.designs_checked}};
  if (r.worst_constraint) j["worst_constraint"] = *r.worst_constraint;
  if (r.worst_design) j["worst_design"] = encode(*r.worst_design);
  return j;
}

Json encode(const FdReport& r) {
  return {{"check", "finite-differences"},
          {"pass", r.pass},
          {"points", r.points},
          {"excluded", r.excluded},
          {"max_grad_rel_err", encode(r.max_grad_rel_err)},
          {"max_hess_rel_err", encode(r.max_hess_rel_err)},
          {"min_hess_eig_rel", encode(r.min_hess_eig_rel)},
          {"tolerances", {{"grad", 1e-6}, {"hess", 1e-4}, {"eig", -1e-8}}}};
}

Json encode(const CombinationReport& r) {
  return {{"check", "psd-combinations"},
          {"pass", r.pass},
          {"samples", r.samples},
          {"min_value", encode(r.min_value)},
          {"tolerance", encode(r.tolerance)}};
}

Json encode(const ViolationBoundReport& r) {
  Json margins = Json::array();
  for (const auto& m : r.margins) {
    margins.push_back({{"constraint", m.constraint},
                       {"value", encode(m.value)},
                       {"bound", encode(m.bound)},
                       {"pass", m.pass}});
  }
  return {{"check", "violation-bound"},
          {"pass", r.pass},
          {"f_d_value", encode(r.f_d_value)},
          {"delta", encode(r.delta)},
          {"margins", margins}};
}

Json encode(const MinimaxReport& r) {
  return {{"check", "minimax"},
          {"pass", r.pass},
          {"dual_value", encode(r.dual_value)},
          {"scale", encode(r.scale)},
          {"max_sampled_F", encode(r.max_sampled_F)},
          {"sandwich_gap", encode(r.sandwich_gap)},
          {"feasible_points", r.feasible_points},
          {"includes_dual_point", r.includes_dual_point},
          {"phi_samples", r.phi_samples},
          {"worst_lagrangian_slack", encode(r.worst_lagrangian_slack)},
          {"upper_ok", r.upper_ok},
          {"lower_ok", r.lower_ok}};
}

Json encode(const QMembership& q) {
  Json j = {{"check", "q-membership"},
            {"verdict", to_string(q.verdict)},
            {"best_combination_value", encode(q.best_combination_value)}};
  if (q.certificate) j["certificate"] = encode(*q.certificate);
  return j;
}

RealVector decode_real_vector(const Json& j) {
  const auto v = doubles(j);
  return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ComplexVector decode_complex_vector(const Json& j) {
  const auto re = doubles(field(j, "re"));
  const auto im = doubles(field(j, "im"));
  if (re.size() != im.size()) bad("complex vector parts differ in length");
  ComplexVector v(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Eigen::Index>(i)) = {re[i], im[i]};
  return v;
}

ComplexMatrix decode_complex_matrix(const Json& j) {
  const auto rows = get<Eigen::Index>(j, "rows");
  const auto cols = get<Eigen::Index>(j, "cols");
  const auto re = doubles(field(j, "re"));
  const auto im = doubles(field(j, "im"));
  if (rows < 0 || cols < 0 || re.size() != static_cast<std::size_t>(rows * cols) ||
      im.size() != re.size()) {
    bad("complex matrix entries do not match its shape");
  }
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto k = static_cast<std::size_t>(r * cols + c);
      m(r, c) = {re[k], im[k]};
    }
  }
  return m;
}

QuadraticForm decode_quadratic_form(const Json& j) {
  return QuadraticForm(decode_complex_vector(field(j, "s")),
                       decode_complex_matrix(field(j, "a")), decode_double(field(j, "v")));
}

Constraint decode_constraint(const Json& j) {
  QuadraticForm f(decode_complex_vector(field(j, "s")), decode_complex_matrix(field(j, "A")),
                  decode_double(field(j, "v")));
  return {std::move(f), parse_enum(field(j, "kind"), kConstraintKinds, "constraint kind"),
          get<std::string>(j, "label")};
}

ConstraintSet decode_constraint_set(const Json& j) {
  std::vector<Constraint> cs;
  std::optional<std::size_t> compact;
  const Json& list = field(j, "constraints");
  if (!list.is_array()) bad("'constraints' must be an array");
  for (const auto& c : list) {
    if (c.value("compact", false)) {
      if (compact) bad("more than one constraint is flagged compact");
      compact = cs.size();
    }
    cs.push_back(decode_constraint(c));
  }
  if (!compact) bad("no constraint is flagged compact");
  return ConstraintSet(std::move(cs), *compact);
}

ScatteringProblem decode_problem(const Json& j) {
  ComplexMatrix g = decode_complex_matrix(field(j, "G"));
  std::vector<std::vector<Eigen::Index>> blocks;
  try {
    blocks = field(j, "blocks").get<std::vector<std::vector<Eigen::Index>>>();
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("field 'blocks': ") + e.what());
  }
  DesignPartition part(g.rows(), std::move(blocks));
  return ScatteringProblem(std::move(g), decode_complex_vector(field(j, "v_diagonal")),
                           std::move(part), decode_complex_vector(field(j, "s")),
                           decode_double(field(j, "eps_passivity")),
                           get<std::uint64_t>(j, "seed"));
}

SolverConfig decode_solver_config(const Json& j) {
  SolverConfig cfg;
  if (j.contains("eps_factor")) cfg.eps_factor = decode_double(j.at("eps_factor"));
  if (j.contains("grad_tol")) cfg.grad_tol = decode_double(j.at("grad_tol"));
  if (j.contains("max_iters")) cfg.max_iters = get<int>(j, "max_iters");
  if (j.contains("seed")) cfg.seed = get<std::uint64_t>(j, "seed");
  return cfg;
}

RestoreConfig decode_restore_config(const Json& j) {
  RestoreConfig cfg;
  if (j.contains("stages")) cfg.stages = get<int>(j, "stages");
  if (j.contains("penalty_growth")) cfg.penalty_growth = decode_double(j.at("penalty_growth"));
  if (j.contains("inner_steps")) cfg.inner_steps = get<int>(j, "inner_steps");
  if (j.contains("seed")) cfg.seed = get<std::uint64_t>(j, "seed");
  return cfg;
}

RefinementConfig decode_refinement_config(const Json& j) {
  RefinementConfig cfg;
  if (j.contains("solver")) cfg.solver = decode_solver_config(j.at("solver"));
  if (j.contains("cert_tol")) cfg.cert_tol = decode_double(j.at("cert_tol"));
  if (j.contains("max_restarts")) cfg.max_restarts = get<int>(j, "max_restarts");
  if (j.contains("a_obj")) cfg.a_obj = decode_double(j.at("a_obj"));
  if (j.contains("single_shot")) cfg.single_shot = get<bool>(j, "single_shot");
  if (j.contains("hybrid_alpha")) cfg.hybrid_alpha = get<bool>(j, "hybrid_alpha");
  if (j.contains("alpha_steps")) cfg.alpha_steps = get<int>(j, "alpha_steps");
  if (j.contains("restore")) cfg.restore = decode_restore_config(j.at("restore"));
  return cfg;
}

RefinementTrace decode_refinement_trace(const Json& j) {
  RefinementTrace tr;
  const Json& steps = field(j, "iterations");
  if (!steps.is_array()) bad("'iterations' must be an array");
  for (const auto& s : steps) {
    RefinementStep step;
    step.source_modification = decode_complex_vector(field(s, "source_modification"));
    step.alpha = decode_double(field(s, "alpha"));
    step.dual_value = decode_double(field(s, "dual_value"));
    step.max_violation = decode_double(field(s, "max_violation"));
    step.termination = parse_enum(field(s, "termination"), kTerminations, "termination");
    step.solver_iterations = get<int>(s, "solver_iterations");
    tr.iterations.push_back(std::move(step));
  }
  tr.final = decode_certificate(field(j, "final"));
  tr.final_objective = decode_quadratic_form(field(j, "final_objective"));
  tr.final_solution = decode_solution(field(j, "final_solution"));
  tr.restart_cap_reached = get<bool>(j, "restart_cap_reached");
  tr.progress_stalled = get<bool>(j, "progress_stalled");
  return tr;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    bad(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) bad("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) bad("write failed for " + path.string());
}

}  // namespace duality_bounds
