#pragma once

#include <vector>

#include "smoke/admm.hpp"
#include "smoke/keyframes.hpp"
#include "smoke/lbfgs.hpp"
#include "smoke/simulator.hpp"

namespace smoke {

/// Forward trajectory and reverse-mode adjoints for one control vector.
struct AdjointWorkspace {
  std::vector<SimState> trajectory;  // N + 1
  std::vector<StepTape> tapes;       // N
  std::vector<ScalarField> rho_adj;  // dJ/drho_i, N + 1
  std::vector<FaceField> v_adj;      // dJ/dv_i, N + 1
};

/// Shooting formulation: v_0 = 0, s_{i+1} = step(s_i, u_i), minimise
///   1/2 sum_i |rho_i - rho*_i|^2_C + r/2 sum_i |u_i|^2
/// over the per-face forces u_i. A null metric uses the plain 2-norm.
struct ShootingProblem {
  const ScalarField& rho0;
  const KeyframeSet& keyframes;
  const GaussianMetric* metric = nullptr;
  double r = 1e3;
  SimConfig sim{};
};

/// Objective and its gradient with respect to every u_i; ws (optional)
/// keeps the trajectory and adjoints of this evaluation.
double objective_and_gradient(const ShootingProblem& pb, const std::vector<FaceField>& u,
                              std::vector<FaceField>& grad, AdjointWorkspace* ws = nullptr);

struct BaselineOptions {
  LbfgsOptions lbfgs{};
  /// Stop when consecutive iterates' densities differ by less than this
  /// (inf-norm over all steps); <= 0 uses rho_max / 100.
  double eps_visual = 0.0;
  /// Give up after this much wall time (<= 0: no limit).
  double max_wall_s = 0.0;
};

struct BaselineResult {
  ControlResult control;  // log.outer follows the ADMM schema, one row per iteration
  LbfgsResult lbfgs;
  double objective = 0.0;
};

BaselineResult minimize(const ShootingProblem& pb, const BaselineOptions& opt = {});

std::vector<double> flatten(const std::vector<FaceField>& u);
void unflatten(const Eigen::VectorXd& x, std::vector<FaceField>& u);

}  // namespace smoke
