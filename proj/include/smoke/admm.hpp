#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "smoke/ao_solver.hpp"
#include "smoke/errors.hpp"
#include "smoke/keyframes.hpp"
#include "smoke/simulator.hpp"
#include "smoke/stfas.hpp"

namespace smoke {

struct AdmmLogRow;

struct AdmmConfig {
  double K = 1e3;
  double r = 1e3;
  double beta = 1.0;
  double dt = 0.4;
  int ao_iters = 2;
  double eps_stfas = 1e-5;
  double eps_admm = 0.0;  // <= 0: rho_max / 100 of the initial frame
  int max_outer = 60;
  int nso_cycle_budget = 60;
  /// Hold lambda fixed until the augmented objective stops decreasing by
  /// more than fallback_tol (relative), then apply one update.
  bool fallback = false;
  double fallback_tol = 1e-3;
  bool lm = false;
  bool safeguard = false;
  int metric_levels = 0;
  AdvectionOptions advection{};
  StfasOptions stfas{};
  double projection_tol = 1e-10;
  /// Called after every outer iteration (progress reporting).
  std::function<void(const AdmmLogRow&)> progress;
};

struct AdmmLogRow {
  int outer_iter = 0;
  double ao_obj = 0.0;
  double nso_resid = 0.0;
  double visual_diff = 0.0;
  double wall_s = 0.0;
  double augmented = 0.0;
  double primal_gap = 0.0;  // max_i |v_i - v*_i|_inf
  double vstar_max = 0.0;
  bool lambda_updated = false;
};

struct NsoLogRow {
  int admm_iter = 0;
  NsoCycleRecord record;
};

struct ConvergenceLog {
  std::vector<AdmmLogRow> outer;
  std::vector<NsoLogRow> nso;
};

struct ControlResult {
  std::vector<SimState> trajectory;  // N + 1; v from the NSO side, rho from the AO side
  std::vector<FaceField> forces;     // N
  std::vector<FaceField> vstar;      // N
  std::vector<FaceField> lambda;     // N
  ConvergenceLog log;
  bool converged = false;
  int outer_iters = 0;
  double eps_admm = 0.0;
  double wall_s = 0.0;
};

/// Thrown when max_outer is exhausted; carries the last iterate and logs.
struct AdmmMaxIterations : MaxIterations {
  AdmmMaxIterations(const std::string& w, std::shared_ptr<ControlResult> r)
      : MaxIterations(w), result(std::move(r)) {}
  std::shared_ptr<ControlResult> result;
};

/// rho_max / 100 of the initial density.
double default_eps_admm(const ScalarField& rho0);

/// 1/2 sum_i c_i |rho_i - rho*_i|^2 + r/2 sum_i |u_i|^2 over keyframe steps.
double objective(const std::vector<ScalarField>& rho, const KeyframeSet& keyframes,
                 const std::vector<FaceField>& forces, double r);
/// Same with the multi-scale metric in place of the plain 2-norm.
double objective(const std::vector<ScalarField>& rho, const KeyframeSet& keyframes,
                 const std::vector<FaceField>& forces, double r, const GaussianMetric& metric);

/// Outer loop alternating the advection and Navier-Stokes subproblems.
ControlResult run(const ScalarField& rho0, const KeyframeSet& keyframes, const AdmmConfig& cfg);

void validate(const AdmmConfig& cfg);

}  // namespace smoke
