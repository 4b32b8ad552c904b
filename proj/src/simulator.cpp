#include "smoke/simulator.hpp"

#include "smoke/errors.hpp"
#include "smoke/field_ops.hpp"
#include "smoke/poisson.hpp"
#include "smoke/self_advection.hpp"

namespace smoke {

void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (cfg.picard_iters < 1) throw InvalidArgument("picard_iters must be >= 1");
  if (!(cfg.sim_tol > 0.0)) throw InvalidArgument("sim_tol must be positive");
}

SimState step(const SimState& s, const FaceField& u, const SimConfig& cfg, StepReport* report, StepTape* tape) {
  validate(cfg);
  const GridSpec& spec = s.v.spec();
  if (u.spec() != spec || s.rho.spec() != spec) throw SpecMismatch("step inputs on different grids");

  StepReport rep;
  if (tape) {
    tape->iterates.clear();
    tape->iterates.push_back(s.v);
  }
  FaceField base(s.v);
  axpy(cfg.dt, u.values(), base.values());

  FaceField cur(s.v);
  ScalarField pressure(spec);
  for (int m = 0; m < cfg.picard_iters; ++m) {
    FaceField w(base);
    self_advection_add(cur, w, -cfg.dt);
    auto proj = project_solenoidal_full(w, cfg.projection_tol);
    FaceField diff(proj.field);
    axpy(-1.0, cur.values(), diff.values());
    rep.picard_residual = norm_inf(diff.values());
    rep.picard_used = m + 1;
    cur = std::move(proj.field);
    pressure = std::move(proj.potential);
    if (tape) tape->iterates.push_back(cur);
    if (rep.picard_residual <= cfg.sim_tol) {
      rep.converged = true;
      break;
    }
  }
  scale(pressure.values(), 1.0 / cfg.dt);

  AdvectionOperator adv(s.v, cfg.advection);
  auto [rho_next, trunc] = adv.advect(s.rho, cfg.dt);
  rep.advection = trunc;
  if (tape) tape->density_terms = trunc.k_used;
  if (report) *report = rep;
  if (cfg.strict && !rep.converged)
    throw NonConvergence("Picard iteration stalled above sim_tol", rep.picard_residual);
  return SimState{std::move(cur), std::move(pressure), std::move(rho_next)};
}

std::vector<SimState> simulate(const SimState& s0, const std::vector<FaceField>& forces, const SimConfig& cfg,
                               std::vector<StepReport>* reports, std::vector<StepTape>* tapes) {
  std::vector<SimState> out;
  out.reserve(forces.size() + 1);
  out.push_back(s0);
  if (reports) reports->assign(forces.size(), StepReport{});
  if (tapes) tapes->assign(forces.size(), StepTape{});
  for (std::size_t i = 0; i < forces.size(); ++i) {
    try {
      out.push_back(step(out.back(), forces[i], cfg, reports ? &(*reports)[i] : nullptr, tapes ? &(*tapes)[i] : nullptr));
    } catch (const NonConvergence& e) {
      throw NonConvergence("timestep " + std::to_string(i) + ": " + e.what(), e.residual);
    } catch (const TruncationOverflow& e) {
      throw TruncationOverflow("timestep " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace smoke
