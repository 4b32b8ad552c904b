#pragma once

#include <vector>

#include "smoke/advection.hpp"
#include "smoke/keyframes.hpp"

namespace smoke {

/// Advection subproblem: find solenoidal v*_i (i < N) minimising
///   1/2 sum_i |rho_i - rho*_i|^2_{C_i} + K/2 sum_i |g_i - v*_i|^2,
///   rho_{i+1} = A(rho_i, v*_i),
/// for guide fields g_i (the NSO velocities shifted by lambda_i / K).
struct AoProblem {
  const ScalarField& rho0;
  const KeyframeSet& keyframes;
  const GaussianMetric& metric;
  double K = 1e3;
  double dt = 0.4;
  AdvectionOptions advection{};
  double projection_tol = 1e-10;
};

struct AoState {
  std::vector<FaceField> vstar;   // N
  std::vector<ScalarField> rho;   // N + 1
  std::vector<ScalarField> mu;    // N, mu_i pairs with rho_{i+1} = A(rho_i, v*_i)
  std::vector<int> terms;         // Taylor degree of each forward step
};

struct AoOptions {
  int iters = 2;
  bool safeguard = false;
  int max_halvings = 30;
};

struct AoReport {
  std::vector<double> objective;  // before the first sweep, then after each sweep
  std::vector<double> alpha;      // accepted blend factor per sweep
};

/// Forward densities for the current state.vstar (fills rho and terms).
void ao_forward(const AoProblem& pb, AoState& state);

/// Keyframe misfit term alone (uses state.rho).
double ao_misfit(const AoProblem& pb, const AoState& state);
/// Full objective; runs ao_forward first.
double ao_objective(const AoProblem& pb, const std::vector<FaceField>& guide, AoState& state);

/// One fixed-point sweep: forward densities, then backward
///   mu_{i-1} = (dA_i/drho)^T mu_i - C_i (rho_i - rho*_i),
///   v*_{i-1} = Q(g_{i-1} + (dA_{i-1}/dv)^T mu_{i-1} / K).
void ao_sweep(const AoProblem& pb, const std::vector<FaceField>& guide, AoState& state);

/// Gradient of the misfit with respect to each v*_i (adjoint of the
/// forward pass at fixed truncation degrees); state must hold a forward pass.
std::vector<FaceField> ao_misfit_gradient(const AoProblem& pb, const AoState& state);

/// Runs opt.iters sweeps starting from `init` (or Q(guide) if null). With
/// the safeguard each sweep's result is blended with the previous iterate so
/// the objective never increases.
AoState solve_ao(const AoProblem& pb, const std::vector<FaceField>& guide, const AoOptions& opt,
                 const std::vector<FaceField>* init = nullptr, AoReport* report = nullptr);

}  // namespace smoke
