#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smoke/keyframes.hpp"

namespace smoke {

// Synthetic keyframe problems on the unit square (h = 1/n). Shapes have a
// soft edge 0.1 wide; the seed jitters positions slightly.

struct Benchmark {
  std::string name;
  ScalarField rho0;
  KeyframeSet keyframes;
};

std::vector<std::string> benchmark_names();  // blob, letter, bunny

/// Soft disc of radius rad (unit-square coordinates).
ScalarField disc(const GridSpec& spec, double cx, double cy, double rad, double value = 1.0);

Benchmark translated_blob(int n, int N, Boundary b = Boundary::Neumann, std::uint64_t seed = 0);
Benchmark circle_to_letter(int n, int N, Boundary b = Boundary::Neumann, std::uint64_t seed = 0);
/// Keyframes at N/2 (two circles) and N (bunny silhouette).
Benchmark circle_to_bunny(int n, int N, Boundary b = Boundary::Neumann, std::uint64_t seed = 0);

Benchmark make_benchmark(const std::string& name, int n, int N, Boundary b = Boundary::Neumann,
                         std::uint64_t seed = 0);

}  // namespace smoke
