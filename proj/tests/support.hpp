#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "smoke/field_ops.hpp"
#include "smoke/grid.hpp"
#include "smoke/poisson.hpp"

namespace smoke::test {

inline ScalarField random_scalar(const GridSpec& s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  ScalarField f(s);
  for (auto& x : f.values()) x = d(rng);
  return f;
}

inline FaceField random_face(const GridSpec& s, std::mt19937_64& rng, double amp = 1.0) {
  std::uniform_real_distribution<double> d(-amp, amp);
  FaceField f(s);
  for (auto& x : f.values()) x = d(rng);
  enforce_walls(f);
  return f;
}

inline FaceField random_solenoidal(const GridSpec& s, std::mt19937_64& rng, double amp = 1.0) {
  return project_solenoidal(random_face(s, rng, amp), 1e-13);
}

// Discrete curl of a corner stream function; exactly divergence-free.
// psi vanishes on the walls of a Neumann grid.
inline FaceField vortex(const GridSpec& s, double amp, double phase = 0.0) {
  FaceField v(s);
  const double L = s.res[0] * s.h;
  auto psi = [&](int i, int j) {
    double x = i * s.h / L, y = j * s.h / L;
    if (s.periodic()) return amp * L * std::sin(2 * M_PI * x + phase) * std::cos(2 * M_PI * y);
    return amp * L * std::sin(M_PI * x) * std::sin(M_PI * y) * (1 + 0.5 * std::sin(3 * M_PI * x + phase));
  };
  auto d0 = s.face_dims(0), d1 = s.face_dims(1);
  for (int j = 0; j < d0[1]; ++j)
    for (int i = 0; i < d0[0]; ++i) v.at(0, i, j) = (psi(i, j + 1) - psi(i, j)) / s.h;
  for (int j = 0; j < d1[1]; ++j)
    for (int i = 0; i < d1[0]; ++i) v.at(1, i, j) = -(psi(i + 1, j) - psi(i, j)) / s.h;
  enforce_walls(v);
  return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace smoke::test
