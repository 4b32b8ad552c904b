#include "smoke/stfas.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <tuple>

#include "smoke/errors.hpp"
#include "smoke/field_ops.hpp"
#include "smoke/transfer.hpp"

namespace smoke {

namespace {

void restrict_state(const SpacetimeFields& fine, SpacetimeFields& coarse) {
  for (std::size_t i = 0; i < fine.v.size(); ++i) restrict_faces(fine.v[i], coarse.v[i]);
  for (std::size_t i = 0; i < fine.pbar.size(); ++i) restrict_cells(fine.pbar[i], coarse.pbar[i]);
  for (std::size_t i = 0; i < fine.u.size(); ++i) restrict_faces(fine.u[i], coarse.u[i]);
  for (std::size_t i = 0; i < fine.p.size(); ++i) restrict_cells(fine.p[i], coarse.p[i]);
}

void prolong_state_add(const SpacetimeFields& coarse, SpacetimeFields& fine, double alpha) {
  for (std::size_t i = 0; i < fine.v.size(); ++i) prolong_faces_add(coarse.v[i], fine.v[i], alpha);
  for (std::size_t i = 0; i < fine.pbar.size(); ++i) prolong_cells_add(coarse.pbar[i], fine.pbar[i], alpha);
  for (std::size_t i = 0; i < fine.u.size(); ++i) prolong_faces_add(coarse.u[i], fine.u[i], alpha);
  for (std::size_t i = 0; i < fine.p.size(); ++i) prolong_cells_add(coarse.p[i], fine.p[i], alpha);
}

void restrict_fields(const std::vector<FaceField>& fine, std::vector<FaceField>& coarse, const GridSpec& cs) {
  coarse.resize(fine.size(), FaceField(cs));
  for (std::size_t i = 0; i < fine.size(); ++i) restrict_faces(fine[i], coarse[i]);
}

}  // namespace

StfasHierarchy::StfasHierarchy(const GridSpec& fine, int steps, StfasOptions opt) : steps_(steps), opt_(opt) {
  if (steps < 1) throw InvalidArgument("STFAS needs N >= 1");
  if (opt.pre < 0 || opt.post < 0 || opt.coarse < 1) throw InvalidArgument("invalid smoothing counts");
  GridSpec s = fine;
  while (true) {
    Level L;
    L.spec = s;
    if (!levels_.empty()) {
      L.x = SpacetimeFields::zeros(s, steps);
      L.rhs = SpacetimeFields::zeros(s, steps);
    }
    L.work = SpacetimeFields::zeros(s, steps);
    levels_.push_back(std::move(L));
    if (!s.can_coarsen()) break;
    if (opt.max_levels > 0 && static_cast<int>(levels_.size()) >= opt.max_levels) break;
    s = s.coarsened();
  }
}

std::pair<double, double> StfasHierarchy::residual_norms(const SpacetimeState& x, const std::vector<FaceField>& vstar,
                                                         const NsoParams& prm) {
  SpacetimeResidual& w = levels_[0].work;
  kkt_residual_into(x, vstar, prm, w);
  return {norm_inf(w), norm2(w)};
}

void StfasHierarchy::vcycle(SpacetimeState& x, const std::vector<FaceField>& vstar, const NsoParams& prm,
                            const Damping& damp) {
  if (x.spec() != levels_[0].spec || x.steps() != steps_) throw SpecMismatch("state does not match the hierarchy");
  // Guides (and the proximal anchor) follow the state down the hierarchy.
  for (int l = 1; l < level_count(); ++l) {
    restrict_fields(l == 1 ? vstar : levels_[l - 1].vstar, levels_[l].vstar, levels_[l].spec);
    if (damp.sigma != 0.0)
      restrict_fields(l == 1 ? *damp.anchor : levels_[l - 1].anchor, levels_[l].anchor, levels_[l].spec);
  }
  cycle(0, x, nullptr, vstar, prm, damp);
}

void StfasHierarchy::cycle(int l, SpacetimeState& x, const SpacetimeResidual* rhs, const std::vector<FaceField>& vstar,
                           const NsoParams& prm, const Damping& damp) {
  Level& L = levels_[l];
  if (l + 1 == level_count()) {
    for (int k = 0; k < opt_.coarse; ++k) scgs_smooth(x, vstar, rhs, prm, L.work, opt_.smoother, damp);
    return;
  }
  for (int k = 0; k < opt_.pre; ++k) scgs_smooth(x, vstar, rhs, prm, L.work, opt_.smoother, damp);

  Level& C = levels_[l + 1];
  const Damping cdamp{damp.sigma, damp.sigma != 0.0 ? &C.anchor : nullptr};
  // R(rhs - f(x)) with the residual taken before x is modified.
  kkt_residual_into(x, vstar, prm, L.work, damp);
  if (rhs) axpy(-1.0, *rhs, L.work);
  restrict_state(L.work, C.rhs);
  scale(C.rhs, -1.0);

  restrict_state(x, C.x);
  prolong_state_add(C.x, x, -1.0);
  kkt_residual_into(C.x, C.vstar, prm, C.work, cdamp);
  axpy(1.0, C.work, C.rhs);

  cycle(l + 1, C.x, &C.rhs, C.vstar, prm, cdamp);

  prolong_state_add(C.x, x, 1.0);
  for (int k = 0; k < opt_.post; ++k) scgs_smooth(x, vstar, rhs, prm, L.work, opt_.smoother, damp);
}

NsoReport solve_nso(SpacetimeState& x, const std::vector<FaceField>& vstar, const NsoParams& prm,
                    const NsoOptions& opt, StfasHierarchy* hier) {
  if (!(opt.eps > 0.0)) throw InvalidArgument("eps_STFAS must be positive");
  if (opt.cycle_budget < 1) throw InvalidArgument("cycle budget must be >= 1");
  if (!(prm.K > 0.0) || !(prm.r > 0.0) || !(prm.dt > 0.0)) throw InvalidArgument("K, r and dt must be positive");
  std::optional<StfasHierarchy> own;
  if (!hier) {
    own.emplace(x.spec(), x.steps(), opt.stfas);
    hier = &*own;
  }
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const double kr = prm.K / prm.r;

  NsoReport rep;
  auto [rinf, rl2] = hier->residual_norms(x, vstar, prm);
  rep.cycles.push_back({0, rinf, rl2, 0.0, 0.0});
  std::vector<FaceField> anchor;
  std::optional<SpacetimeState> backup;
  double sigma = 0.0;
  for (int cyc = 1; cyc <= opt.cycle_budget && rinf > opt.eps; ++cyc) {
    Damping damp;
    if (sigma > 0.0) {
      anchor = x.v;
      damp = {sigma, &anchor};
    }
    if (opt.lm) {
      if (backup)
        *backup = x;
      else
        backup.emplace(x);
    }
    const double prev = rinf;
    bool failed = false;
    try {
      hier->vcycle(x, vstar, prm, damp);
      remove_pressure_means(x);
      std::tie(rinf, rl2) = hier->residual_norms(x, vstar, prm);
      failed = !std::isfinite(rinf) || rinf > opt.lm_blowup * prev;
    } catch (const SingularBlock&) {
      if (!opt.lm) throw;
      failed = true;
    }
    if (failed && opt.lm) {
      // reject the cycle and retry from the previous iterate with a stronger shift
      x = *backup;
      rinf = prev;
      std::tie(rinf, rl2) = hier->residual_norms(x, vstar, prm);
      sigma = std::max(4.0 * sigma, kr);
      ++rep.lm_activations;
      ++rep.rejected;
    }
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    rep.cycles.push_back({cyc, rinf, rl2, ms, sigma});
    if (!std::isfinite(rinf)) throw NonConvergence("NSO residual diverged at cycle " + std::to_string(cyc), rinf);

    if (!opt.lm || failed) continue;
    if (sigma > 0.0) {
      if (rinf < prev) {
        sigma *= 0.5;
        if (sigma < 1e-3 * kr) sigma = 0.0;
      } else if (rinf >= prev) {
        sigma *= 4.0;
      }
    } else if (cyc >= opt.lm_window) {
      const double past = rep.cycles[cyc - opt.lm_window].residual_inf;
      const double factor = std::pow(rinf / past, 1.0 / opt.lm_window);
      if (factor > opt.lm_stall) {
        sigma = kr;
        ++rep.lm_activations;
      }
    }
  }
  rep.residual_inf = rinf;
  rep.converged = rinf <= opt.eps;
  if (!rep.converged && !opt.lm)
    throw NonConvergence("NSO did not reach eps_STFAS within " + std::to_string(opt.cycle_budget) + " V-cycles", rinf);
  return rep;
}

}  // namespace smoke
