#pragma once

#include <vector>

#include "smoke/advection.hpp"
#include "smoke/grid.hpp"

namespace smoke {

struct SimState {
  FaceField v;
  ScalarField p;
  ScalarField rho;

  static SimState at_rest(const ScalarField& rho0) { return {FaceField(rho0.spec()), ScalarField(rho0.spec()), rho0}; }
};

struct SimConfig {
  double dt = 0.4;
  int picard_iters = 3;
  double sim_tol = 1e-8;
  double projection_tol = 1e-10;
  AdvectionOptions advection{};
  /// Throw NonConvergence when the Picard iteration ends above sim_tol.
  bool strict = false;
};

struct StepReport {
  int picard_used = 0;
  double picard_residual = 0.0;
  bool converged = false;
  TruncationReport advection{};
};

/// Record of one step kept for the adjoint: the Picard iterates (first is
/// the previous velocity) and the Taylor degree used for the density.
struct StepTape {
  std::vector<FaceField> iterates;
  int density_terms = 0;
};

/// One implicit step
///   (v' - v)/dt + Adv(v') = u - grad p',  div v' = 0,
///   rho' = advect(rho, v)
/// solved by Picard sweeps v^{m+1} = Q(v + dt (u - Adv(v^m))).
SimState step(const SimState& s, const FaceField& u, const SimConfig& cfg, StepReport* report = nullptr,
              StepTape* tape = nullptr);

/// Repeated steps; returns forces.size() + 1 states.
std::vector<SimState> simulate(const SimState& s0, const std::vector<FaceField>& forces, const SimConfig& cfg,
                               std::vector<StepReport>* reports = nullptr, std::vector<StepTape>* tapes = nullptr);

void validate(const SimConfig& cfg);

}  // namespace smoke
