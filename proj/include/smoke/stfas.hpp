#pragma once

#include <vector>

#include "smoke/nso.hpp"

namespace smoke {

struct StfasOptions {
  int pre = 2;
  int post = 2;
  int coarse = 10;
  int max_levels = 0;  // 0: coarsen as far as the grid allows
  SmootherOptions smoother{};
};

/// Spatially semi-coarsened hierarchy (every level keeps all N timesteps).
/// Level 0 borrows the caller's state and guides; coarser levels own their
/// state, FAS right-hand side, scratch residual and restricted guides.
class StfasHierarchy {
 public:
  StfasHierarchy(const GridSpec& fine, int steps, StfasOptions opt = {});

  int level_count() const { return static_cast<int>(levels_.size()); }
  const GridSpec& spec(int l) const { return levels_[l].spec; }
  int steps() const { return steps_; }
  const StfasOptions& options() const { return opt_; }

  /// One FAS V-cycle towards f(x) = 0 on level 0.
  void vcycle(SpacetimeState& x, const std::vector<FaceField>& vstar, const NsoParams& prm, const Damping& damp = {});

  /// Undamped residual of x; returns (inf-norm, 2-norm).
  std::pair<double, double> residual_norms(const SpacetimeState& x, const std::vector<FaceField>& vstar,
                                           const NsoParams& prm);

 private:
  struct Level {
    GridSpec spec;
    SpacetimeState x;
    SpacetimeResidual rhs;
    SpacetimeResidual work;
    std::vector<FaceField> vstar;
    std::vector<FaceField> anchor;
  };
  void cycle(int l, SpacetimeState& x, const SpacetimeResidual* rhs, const std::vector<FaceField>& vstar,
             const NsoParams& prm, const Damping& damp);

  int steps_;
  StfasOptions opt_;
  std::vector<Level> levels_;
};

struct NsoOptions {
  double eps = 1e-5;
  int cycle_budget = 60;
  bool lm = false;
  double lm_stall = 0.95;  // per-cycle reduction factor that counts as stalled
  int lm_window = 3;
  double lm_blowup = 10.0;  // with lm, a cycle that grows the residual by this factor is rejected
  StfasOptions stfas{};
};

struct NsoCycleRecord {
  int cycle = 0;
  double residual_inf = 0.0;
  double residual_l2 = 0.0;
  double wall_ms = 0.0;
  double sigma = 0.0;
};

struct NsoReport {
  std::vector<NsoCycleRecord> cycles;  // entry 0 is the initial residual
  bool converged = false;
  double residual_inf = 0.0;
  int lm_activations = 0;
  int rejected = 0;  // cycles undone by the lm safeguard
};

/// Repeats V-cycles until |f|_inf <= eps. With opt.lm a stall switches on a
/// proximal shift sigma (v - v_prev) in the stationarity rows, re-anchored
/// every cycle and relaxed as progress resumes; a cycle that blows up (or
/// hits a singular cell block) is undone and retried with a larger sigma.
/// Throws NonConvergence when the budget runs out without lm.
NsoReport solve_nso(SpacetimeState& x, const std::vector<FaceField>& vstar, const NsoParams& prm,
                    const NsoOptions& opt = {}, StfasHierarchy* hier = nullptr);

}  // namespace smoke
