#include "duality_bounds/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "duality_bounds/corpus.hpp"
#include "duality_bounds/errors.hpp"
#include "duality_bounds/refinement.hpp"
#include "duality_bounds/verification.hpp"

namespace duality_bounds {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStages[] = {"solve", "verify", "refine"};
constexpr const char* kSuites[] = {"validity",         "fd",              "weak-duality",
                                   "psd-combinations", "violation-bound", "minimax"};

std::mutex log_mutex;

void log_error(const std::string& msg) {
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "error: " << msg << '\n';
}

// Worst exit status wins: input errors over gaps over success.
int combine(int a, int b) {
  auto rank = [](int c) { return c == kExitInputError ? 2 : c == kExitGap ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

std::optional<int> thread_cap() {
  const char* env = std::getenv("DUALITY_BOUNDS_THREADS");
  if (env == nullptr || *env == '\0') return std::nullopt;
  try {
    const int n = std::stoi(env);
    if (n > 0) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidInput,
              std::string("DUALITY_BOUNDS_THREADS must be a positive integer, got '") + env +
                  "'");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScatteringProblem load_problem(const fs::path& path) {
  return decode_problem(read_json_file(path));
}

ConstraintSet load_constraints(const RunManifest& m, const ScatteringProblem& p) {
  if (m.constraints_file) return decode_constraint_set(read_json_file(*m.constraints_file));
  if (m.compact_only) return ConstraintSet({compact_constraint(p)}, 0);
  std::vector<Design> bgs;
  for (const auto& b : m.backgrounds) bgs.push_back(Design::from_string(b));
  if (bgs.empty()) bgs = standard_backgrounds(p.num_blocks());
  return default_family(p, bgs);
}

LagrangianProblem build(const RunManifest& m, const ScatteringProblem& p) {
  return LagrangianProblem::with_eps_factor(make_objective(p, m.objective, m.strength, m.seed),
                                            load_constraints(m, p), m.solver.eps_factor);
}

Json header(const char* format, const RunManifest& m) {
  return {{"format", format},
          {"problem", m.problem.filename().string()},
          {"objective", to_string(m.objective)},
          {"strength", encode(m.strength)},
          {"seed", m.seed}};
}

int stage_solve(const RunManifest& m, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScatteringProblem p = load_problem(m.problem);
  if (m.with_oracle && p.num_blocks() > kMaxEnumerationBlocks) {
    throw Error(ErrorCode::EnumerationCap,
                "--with-oracle enumerates 2^J designs; J = " + std::to_string(p.num_blocks()) +
                    " exceeds the cap of " + std::to_string(kMaxEnumerationBlocks));
  }
  const LagrangianProblem L = build(m, p);
  const DualSolution sol = minimize_dual(L, m.solver);
  const Certificate cert = certify(sol.state, L, sol.scale);
  Json rep = header("duality-bounds/bound-report", m);
  rep["constraints"] = L.num_multipliers();
  rep["eps"] = encode(L.eps());
  rep["solver"] = encode(m.solver);
  rep["dual_value"] = encode(sol.state.value);
  rep["gradient_norm"] = encode(sol.state.grad.norm());
  rep["projected_grad_norm"] = encode(sol.projected_grad_norm);
  rep["iterations"] = sol.iterations;
  rep["termination"] = to_string(sol.termination);
  rep["certificate"] = encode(cert);
  rep["solution"] = encode(sol);
  if (m.with_oracle) {
    const OracleResult o = oracle_bound(p, L.objective());
    rep["oracle"] = {{"value", encode(o.value)},
                     {"design", encode(o.argmax)},
                     {"weak_duality_ok", o.value <= sol.state.value + 1e-8 * sol.scale}};
  }
  rep["wall_time_s"] = seconds_since(t0);
  write_json_file(out, rep);
  return cert.kind == CertificateKind::StrongDual ? kExitOk : kExitGap;
}

int stage_verify(const RunManifest& m, const fs::path& state_file,
                 const std::vector<std::string>& suites, int points, int budget,
                 const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScatteringProblem p = load_problem(m.problem);
  const Json state_json = read_json_file(state_file);
  const LagrangianProblem L = build(m, p);
  const RealVector phi =
      decode_real_vector(state_json.at("solution").at("state").at("phi"));
  if (phi.size() != static_cast<Eigen::Index>(L.num_multipliers())) {
    throw Error(ErrorCode::InvalidInput, "state file does not match the constraint set");
  }
  auto wants = [&](const char* s) {
    return suites.empty() || std::find(suites.begin(), suites.end(), s) != suites.end();
  };

  Json results = Json::array();
  Json skipped = Json::array();
  bool pass = true;
  auto add = [&](Json r) {
    pass = pass && r.at("pass").get<bool>();
    results.push_back(std::move(r));
  };

  if (wants("validity")) {
    add(encode(validate_on_designs(L.constraints(), p, 1e-8)));
  }
  if (!pass) {
    for (const char* s : kSuites) {
      if (std::string(s) != "validity" && wants(s)) skipped.push_back(s);
    }
  } else {
    const DualState st = eval_dual(L, phi);
    const double scale = dual_scale(L);
    if (wants("fd")) add(encode(fd_check_suite(L, points, m.seed)));
    if (wants("weak-duality")) {
      const OracleResult o = oracle_bound(p, L.objective());
      add({{"check", "weak-duality"},
           {"pass", o.value <= st.value + 1e-8 * scale},
           {"oracle_value", encode(o.value)},
           {"oracle_design", encode(o.argmax)},
           {"dual_value", encode(st.value)},
           {"tolerance", encode(1e-8 * scale)}});
    }
    if (wants("psd-combinations")) {
      add(encode(psd_combination_check(L, st.t_star, budget, m.seed, scale)));
    }
    if (wants("violation-bound")) {
      const QuadraticForm& f_dot = L.constraints().compact().form;
      const double delta = std::max(f_dot(st.t_star), 0.0);
      try {
        add(encode(violation_bound_check(L, st.t_star, f_dot, delta)));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PreconditionViolation) throw;
        add({{"check", "violation-bound"}, {"pass", false}, {"error", e.what()}});
      }
    }
    if (wants("minimax")) add(encode(minimax_cross_check(L, p, budget, m.seed)));
  }
  Json rep = header("duality-bounds/verify-report", m);
  rep["state"] = state_file.filename().string();
  rep["suites"] = results;
  rep["skipped"] = skipped;
  rep["pass"] = pass;
  rep["wall_time_s"] = seconds_since(t0);
  write_json_file(out, rep);
  return pass ? kExitOk : kExitGap;
}

int stage_refine(const RunManifest& m, const RefinementConfig& base, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScatteringProblem p = load_problem(m.problem);
  const LagrangianProblem L = build(m, p);
  RefinementConfig cfg = base;
  cfg.solver = m.solver;
  cfg.max_restarts = m.max_restarts;
  cfg.restore.seed = m.seed;
  const RefinementTrace tr = run_restart_loop(L, cfg);
  Json rep = header("duality-bounds/refine-report", m);
  rep["config"] = encode(cfg);
  rep["trace"] = encode(tr);
  rep["restarts"] = tr.iterations.size() - 1;
  rep["wall_time_s"] = seconds_since(t0);
  write_json_file(out, rep);
  return tr.final.kind == CertificateKind::StrongDual ? kExitOk : kExitGap;
}

struct Flags {
  std::vector<std::string> problems;
  std::vector<std::string> manifests;
  std::string constraints;
  std::vector<std::string> backgrounds;
  bool compact_only = false;
  std::string objective = "extinction";
  double strength = 1.0;
  SolverConfig solver;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string out;
  int jobs = 1;
  bool with_oracle = false;
  int max_restarts = 10;
  std::string state;
  std::vector<std::string> suites;
  int points = 50;
  int budget = 100;
  RefinementConfig refine;
};

void add_problem_options(CLI::App* sub, Flags& f) {
  sub->add_option("--problem", f.problems, "Problem JSON file(s)");
  sub->add_option("--manifest", f.manifests, "Run manifest JSON file(s)");
  sub->add_option("--constraints", f.constraints, "Constraint set JSON (overrides the family)");
  sub->add_option("--backgrounds", f.backgrounds, "Background designs such as 0101");
  sub->add_flag("--compact-only", f.compact_only, "Use only the resistive-power constraint");
  sub->add_option("--objective", f.objective, "zero|extinction|absorption|scattering|compact-boundary");
  sub->add_option("--strength", f.strength, "Objective strength");
  sub->add_option("--eps-factor", f.solver.eps_factor, "eps = factor * lambda_min(A_dot)");
  sub->add_option("--grad-tol", f.solver.grad_tol, "Relative gradient tolerance");
  sub->add_option("--max-iters", f.solver.max_iters, "Solver iteration cap");
  sub->add_option("--seed", f.seed, "Seed for every randomized step");
  sub->add_option("--out-dir", f.out_dir, "Directory for per-problem outputs");
  sub->add_option("--out", f.out, "Output file (single problem only)");
  sub->add_option("--jobs", f.jobs, "Parallel workers")->check(CLI::PositiveNumber);
}

std::vector<RunManifest> manifests_from(const Flags& f) {
  std::vector<RunManifest> out;
  for (const auto& path : f.manifests) {
    const fs::path mp(path);
    out.push_back(decode_manifest(read_json_file(mp), mp.parent_path()));
  }
  for (const auto& path : f.problems) {
    RunManifest m;
    m.problem = path;
    if (!fs::exists(m.problem)) {
      throw Error(ErrorCode::InvalidInput, "problem file " + path + " does not exist");
    }
    if (!f.constraints.empty()) m.constraints_file = f.constraints;
    m.backgrounds = f.backgrounds;
    m.compact_only = f.compact_only;
    m.objective = objective_kind_from_string(f.objective);
    m.strength = f.strength;
    m.solver = f.solver;
    m.solver.seed = f.seed;
    m.seed = f.seed;
    m.output_dir = fs::path(f.out_dir) / m.problem.stem();
    m.with_oracle = f.with_oracle;
    m.max_restarts = f.max_restarts;
    out.push_back(std::move(m));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidInput, "no --problem or --manifest given");
  if (!f.out.empty() && out.size() > 1) {
    throw Error(ErrorCode::InvalidInput, "--out needs exactly one problem");
  }
  return out;
}

// Runs `task` on every manifest with up to `jobs` workers.
template <typename Task>
int fan_out(const std::vector<RunManifest>& ms, int jobs, Task task) {
  if (auto cap = thread_cap()) jobs = std::min(jobs, *cap);
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(ms.size())));
  std::vector<int> codes(ms.size(), kExitOk);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < ms.size(); i = next++) {
      try {
        codes[i] = task(ms[i]);
      } catch (const Error& e) {
        log_error(ms[i].problem.string() + ": " + e.what());
        codes[i] = kExitInputError;
      } catch (const std::exception& e) {
        log_error(ms[i].problem.string() + ": " + e.what());
        codes[i] = kExitInputError;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  int code = kExitOk;
  for (int c : codes) code = combine(code, c);
  return code;
}

fs::path output_for(const Flags& f, const RunManifest& m, const char* name) {
  if (!f.out.empty()) return f.out;
  return m.output_dir / (std::string(name) + ".json");
}

int cmd_generate(const Flags& f, Eigen::Index dim, int blocks, double loss, double coupling,
                 const std::string& constraints_out) {
  const ScatteringProblem p = build_toy_problem(dim, blocks, loss, coupling, f.seed);
  Json j = encode(p);
  j["generator"] = {{"dim", dim},
                    {"blocks", blocks},
                    {"loss", encode(loss)},
                    {"coupling", encode(coupling)},
                    {"seed", f.seed}};
  write_json_file(f.out, j);
  if (!constraints_out.empty()) {
    std::vector<Design> bgs;
    for (const auto& b : f.backgrounds) bgs.push_back(Design::from_string(b));
    if (bgs.empty()) bgs = standard_backgrounds(blocks);
    write_json_file(constraints_out, encode(default_family(p, bgs)));
  }
  return kExitOk;
}

}  // namespace

RunManifest decode_manifest(const Json& j, const fs::path& base) {
  auto resolve = [&](const std::string& s) {
    const fs::path p(s);
    return p.is_absolute() ? p : base / p;
  };
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidInput, what); };
  if (!j.is_object()) fail("manifest must be a JSON object");
  if (!j.contains("seed") || !j.at("seed").is_number_unsigned()) {
    fail("manifest needs a non-negative integer 'seed'");
  }
  if (!j.contains("problem") || !j.at("problem").is_string()) {
    fail("manifest needs a 'problem' path");
  }
  RunManifest m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.problem = resolve(j.at("problem").get<std::string>());
  if (!fs::exists(m.problem)) fail("problem file " + m.problem.string() + " does not exist");
  if (j.contains("constraints")) {
    const Json& c = j.at("constraints");
    if (c.contains("file")) {
      m.constraints_file = resolve(c.at("file").get<std::string>());
      if (!fs::exists(*m.constraints_file)) {
        fail("constraint file " + m.constraints_file->string() + " does not exist");
      }
    }
    if (c.contains("backgrounds")) {
      m.backgrounds = c.at("backgrounds").get<std::vector<std::string>>();
    }
    if (c.contains("compact_only")) m.compact_only = c.at("compact_only").get<bool>();
  }
  if (j.contains("objective")) {
    const Json& o = j.at("objective");
    m.objective = objective_kind_from_string(o.at("kind").get<std::string>());
    if (o.contains("strength")) m.strength = decode_double(o.at("strength"));
  }
  if (j.contains("solver")) m.solver = decode_solver_config(j.at("solver"));
  m.solver.seed = m.seed;
  if (j.contains("stages")) m.stages = j.at("stages").get<std::vector<std::string>>();
  for (const auto& s : m.stages) {
    if (std::none_of(std::begin(kStages), std::end(kStages),
                     [&](const char* k) { return s == k; })) {
      fail("unknown stage '" + s + "'");
    }
  }
  m.output_dir = resolve(j.value("output_dir", std::string(".")));
  m.with_oracle = j.value("with_oracle", false);
  m.max_restarts = j.value("max_restarts", 10);
  return m;
}

Json encode(const RunManifest& m) {
  Json j = {{"problem", m.problem.string()},
            {"objective", {{"kind", to_string(m.objective)}, {"strength", encode(m.strength)}}},
            {"solver", encode(m.solver)},
            {"stages", m.stages},
            {"output_dir", m.output_dir.string()},
            {"seed", m.seed},
            {"with_oracle", m.with_oracle},
            {"max_restarts", m.max_restarts}};
  Json c = {{"backgrounds", m.backgrounds}, {"compact_only", m.compact_only}};
  if (m.constraints_file) c["file"] = m.constraints_file->string();
  j["constraints"] = c;
  return j;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Lagrangian dual bounds for compact QCQPs from linear scattering models"};
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("generate", "Write a seeded toy scattering problem");
  Eigen::Index dim = 8;
  int blocks = 4;
  double loss = 0.3;
  double coupling = 0.5;
  std::string constraints_out;
  gen->add_option("--dim", dim, "Problem dimension")->required();
  gen->add_option("--blocks", blocks, "Number of design blocks J")->required();
  gen->add_option("--loss", loss, "Material loss (must be > 0)");
  gen->add_option("--coupling", coupling, "Coupling strength");
  gen->add_option("--seed", f.seed, "Seed");
  gen->add_option("--out", f.out, "Output problem file")->required();
  gen->add_option("--constraints-out", constraints_out, "Also write the default constraint family");
  gen->add_option("--backgrounds", f.backgrounds, "Background designs for --constraints-out");

  auto* solve = app.add_subcommand("solve", "Minimize the dual and certify the bound");
  add_problem_options(solve, f);
  solve->add_flag("--with-oracle", f.with_oracle, "Cross-check against design enumeration");

  auto* verify = app.add_subcommand("verify", "Run verification suites on a solved state");
  add_problem_options(verify, f);
  verify->add_option("--state", f.state, "Bound report written by solve")->required();
  verify->add_option("--suite", f.suites, "Suites to run (default: all)")
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kSuites), std::end(kSuites))));
  verify->add_option("--points", f.points, "Finite-difference points")->check(CLI::NonNegativeNumber);
  verify->add_option("--budget", f.budget, "Samples for the sampling suites")
      ->check(CLI::NonNegativeNumber);

  auto* refine = app.add_subcommand("refine", "Restart loop toward a strongly dual objective");
  add_problem_options(refine, f);
  refine->add_option("--max-restarts", f.max_restarts, "Restart cap")->check(CLI::NonNegativeNumber);
  refine->add_option("--a-obj", f.refine.a_obj, "Regularization of the restore step");
  refine->add_flag("--single-shot", f.refine.single_shot, "Aim directly at the certificate band");
  refine->add_flag("--hybrid-alpha", f.refine.hybrid_alpha, "Bisect the modification size");

  auto* run = app.add_subcommand("run", "Execute the stages listed in manifests");
  run->add_option("--manifest", f.manifests, "Run manifest JSON file(s)")->required();
  run->add_option("--jobs", f.jobs, "Parallel workers")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (auto cap = thread_cap()) Eigen::setNbThreads(*cap);
    if (gen->parsed()) return cmd_generate(f, dim, blocks, loss, coupling, constraints_out);
    if (solve->parsed()) {
      return fan_out(manifests_from(f), f.jobs, [&](const RunManifest& m) {
        return stage_solve(m, output_for(f, m, "bound"));
      });
    }
    if (verify->parsed()) {
      if (!fs::exists(f.state)) {
        throw Error(ErrorCode::InvalidInput, "state file " + f.state + " does not exist");
      }
      return fan_out(manifests_from(f), f.jobs, [&](const RunManifest& m) {
        return stage_verify(m, f.state, f.suites, f.points, f.budget,
                            output_for(f, m, "verify"));
      });
    }
    if (refine->parsed()) {
      return fan_out(manifests_from(f), f.jobs, [&](const RunManifest& m) {
        return stage_refine(m, f.refine, output_for(f, m, "refine"));
      });
    }
    return fan_out(manifests_from(f), f.jobs, [&](const RunManifest& m) {
      int code = kExitOk;
      for (const auto& stage : m.stages) {
        if (stage == "solve") code = combine(code, stage_solve(m, m.output_dir / "bound.json"));
        if (stage == "verify") {
          code = combine(code, stage_verify(m, m.output_dir / "bound.json", {}, 50, 100,
                                            m.output_dir / "verify.json"));
        }
        if (stage == "refine") {
          code = combine(code, stage_refine(m, RefinementConfig{}, m.output_dir / "refine.json"));
        }
      }
      return code;
    });
  } catch (const Error& e) {
    log_error(e.what());
    return kExitInputError;
  } catch (const std::exception& e) {
    log_error(e.what());
    return kExitInputError;
  }
}

}  // namespace duality_bounds
