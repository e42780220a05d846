#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "duality_bounds/dual_solver.hpp"
#include "duality_bounds/io.hpp"
#include "duality_bounds/objectives.hpp"

namespace duality_bounds {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitGap = 3;

struct RunManifest {
  std::filesystem::path problem;
  std::optional<std::filesystem::path> constraints_file;
  std::vector<std::string> backgrounds;  // empty: the two standard backgrounds
  bool compact_only = false;
  ObjectiveKind objective = ObjectiveKind::Extinction;
  double strength = 1.0;
  SolverConfig solver;
  std::vector<std::string> stages;  // any of solve, verify, refine
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 0;
  bool with_oracle = false;
  int max_restarts = 10;
};

/// Relative paths resolve against `base`. Throws InvalidInput when the seed is
/// absent, a stage is unknown or a referenced file does not exist.
RunManifest decode_manifest(const Json& j, const std::filesystem::path& base);
Json encode(const RunManifest& m);

/// Entry point of the `duality-bounds` executable.
int run_cli(int argc, char** argv);

}  // namespace duality_bounds
