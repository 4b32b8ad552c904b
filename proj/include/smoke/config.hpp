#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "smoke/admm.hpp"
#include "smoke/grid.hpp"

namespace smoke {

enum class SolverKind { Admm, Lbfgs };

/// Everything a CLI run needs. Text form is INI-like:
///   [section]
///   key = value        # comment
/// Relative paths are resolved against the config file's directory.
struct RunConfig {
  GridSpec grid = GridSpec::square(32, 1.0 / 32, Boundary::Neumann);
  double dt = 0.4;
  int steps = 10;
  std::string initial;                  // density at step 0
  std::map<int, std::string> keyframes;  // step -> file
  AdmmConfig admm{};
  SolverKind solver = SolverKind::Admm;
  std::string out = "out";
  int threads = 0;  // 0: OpenMP default
  std::uint64_t seed = 0;
  int lbfgs_max_iters = 500;

  bool operator==(const RunConfig& o) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize(const RunConfig& cfg);
/// Throws InvalidArgument when fields are inconsistent.
void validate(const RunConfig& cfg);

std::string to_string(SolverKind s);

}  // namespace smoke
