#pragma once

#include <memory>
#include <vector>

#include "smoke/grid.hpp"

namespace smoke {

struct PoissonReport {
  int cycles = 0;
  double residual_inf = 0.0;
};

/// Geometric V(2,2) multigrid for the cell-centred Laplacian
/// div(grad(phi)) with damped-Jacobi smoothing. The coarsest level is solved
/// directly. The constant null space is removed from the right-hand side
/// and from the solution.
class PoissonSolver {
 public:
  explicit PoissonSolver(const GridSpec& spec);
  ~PoissonSolver();
  PoissonSolver(const PoissonSolver&) = delete;
  PoissonSolver& operator=(const PoissonSolver&) = delete;

  const GridSpec& spec() const;
  int level_count() const;

  /// Solves L phi = rhs to residual inf-norm <= tol, starting from phi.
  /// Throws NonConvergence if max_cycles V-cycles are not enough.
  PoissonReport solve(const ScalarField& rhs, ScalarField& phi, double tol, int max_cycles = 100) const;

  /// Shared solver instance for a spec (thread-safe lookup).
  static const PoissonSolver& for_spec(const GridSpec& spec);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// out = div(grad(phi))
void apply_laplacian(const ScalarField& phi, ScalarField& out);

struct ProjectionResult {
  FaceField field;
  ScalarField potential;  // phi with field = v - grad(phi)
  PoissonReport report;
};

inline constexpr double kDefaultProjectionTol = 1e-10;

/// Returns v - grad(phi) with div(grad(phi)) = div(v); the output's
/// divergence inf-norm is <= tol.
FaceField project_solenoidal(const FaceField& v, double tol = kDefaultProjectionTol, int max_cycles = 100);
ProjectionResult project_solenoidal_full(const FaceField& v, double tol = kDefaultProjectionTol, int max_cycles = 100);

}  // namespace smoke
