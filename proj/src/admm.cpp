#include "smoke/admm.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "smoke/field_ops.hpp"

namespace smoke {

namespace {

[[noreturn]] void rethrow_at(int outer, const Error& e) {
  const std::string w = "outer iteration " + std::to_string(outer) + ": " + e.what();
  if (auto* nc = dynamic_cast<const NonConvergence*>(&e)) throw NonConvergence(w, nc->residual);
  if (dynamic_cast<const TruncationOverflow*>(&e)) throw TruncationOverflow(w);
  if (dynamic_cast<const SingularBlock*>(&e)) throw SingularBlock(w);
  if (dynamic_cast<const SpecMismatch*>(&e)) throw SpecMismatch(w);
  throw Error(e.kind(), w);
}

double sq_diff(const FaceField& a, const FaceField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

}  // namespace

void validate(const AdmmConfig& c) {
  if (!(c.K > 0.0) || !(c.r > 0.0) || !(c.beta > 0.0) || !(c.dt > 0.0))
    throw InvalidArgument("K, r, beta and dt must be positive");
  if (c.ao_iters < 1 || c.max_outer < 1 || c.nso_cycle_budget < 1) throw InvalidArgument("iteration counts must be >= 1");
  if (!(c.eps_stfas > 0.0)) throw InvalidArgument("eps_STFAS must be positive");
  if (c.fallback && !(c.fallback_tol > 0.0)) throw InvalidArgument("fallback tolerance must be positive");
}

double default_eps_admm(const ScalarField& rho0) { return norm_inf(rho0.values()) / 100.0; }

double objective(const std::vector<ScalarField>& rho, const KeyframeSet& kf, const std::vector<FaceField>& forces,
                 double r) {
  double e = 0.0;
  for (int i : kf.indices()) {
    const auto& t = kf.target(i).values();
    const auto& x = rho.at(i).values();
    for (std::size_t k = 0; k < t.size(); ++k) e += 0.5 * (x[k] - t[k]) * (x[k] - t[k]);
  }
  for (const auto& u : forces) e += 0.5 * r * dot(u, u);
  return e;
}

double objective(const std::vector<ScalarField>& rho, const KeyframeSet& kf, const std::vector<FaceField>& forces,
                 double r, const GaussianMetric& metric) {
  double e = 0.0;
  for (int i : kf.indices()) {
    ScalarField d(rho.at(i));
    axpy(-1.0, kf.target(i).values(), d.values());
    e += metric.energy(d);
  }
  for (const auto& u : forces) e += 0.5 * r * dot(u, u);
  return e;
}

ControlResult run(const ScalarField& rho0, const KeyframeSet& keyframes, const AdmmConfig& cfg) {
  validate(cfg);
  keyframes.validate();
  const GridSpec& spec = rho0.spec();
  for (int i : keyframes.indices())
    if (keyframes.target(i).spec() != spec) throw SpecMismatch("keyframe " + std::to_string(i) + " is on another grid");
  const int N = keyframes.steps();
  if (N < 1) throw InvalidArgument("need N >= 1");

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const double eps = cfg.eps_admm > 0.0 ? cfg.eps_admm : default_eps_admm(rho0);

  GaussianMetric metric(spec, cfg.metric_levels);
  AoProblem pb{rho0, keyframes, metric, cfg.K, cfg.dt, cfg.advection, cfg.projection_tol};
  AoOptions ao_opt;
  ao_opt.iters = cfg.ao_iters;
  ao_opt.safeguard = cfg.safeguard;

  const NsoParams prm{cfg.K, cfg.r, cfg.dt};
  NsoOptions nso_opt;
  nso_opt.eps = cfg.eps_stfas;
  nso_opt.cycle_budget = cfg.nso_cycle_budget;
  nso_opt.lm = cfg.lm;
  nso_opt.stfas = cfg.stfas;
  StfasHierarchy hier(spec, N, cfg.stfas);

  auto res = std::make_shared<ControlResult>();
  res->eps_admm = eps;
  SpacetimeState x = SpacetimeFields::zeros(spec, N);
  std::vector<FaceField> lambda(N, FaceField(spec));
  std::vector<ScalarField> rho_last(N + 1, rho0);
  std::vector<FaceField> guide(N, FaceField(spec));
  std::vector<FaceField> target(N, FaceField(spec));
  AoState ao;
  double aug_prev = 0.0;

  auto finish = [&](int outer) {
    res->trajectory.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
      SimState& s = res->trajectory[i];
      s.v = x.v[i];
      s.p = i == 0 ? ScalarField(spec) : x.p[i - 1];
      s.rho = ao.rho[i];
    }
    res->forces = x.u;
    res->vstar = ao.vstar;
    res->lambda = lambda;
    res->outer_iters = outer;
    res->wall_s = std::chrono::duration<double>(clock::now() - t0).count();
  };

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    AdmmLogRow row;
    row.outer_iter = outer;
    try {
      // AO sees v_i + lambda_i / K.
      for (int i = 0; i < N; ++i) {
        copy(x.v[i].values(), guide[i].values());
        axpy(1.0 / cfg.K, lambda[i].values(), guide[i].values());
      }
      ao = solve_ao(pb, guide, ao_opt);
      row.ao_obj = ao_objective(pb, guide, ao);

      // NSO sees v*_i - lambda_i / K.
      for (int i = 0; i < N; ++i) {
        copy(ao.vstar[i].values(), target[i].values());
        axpy(-1.0 / cfg.K, lambda[i].values(), target[i].values());
      }
      NsoReport nrep = solve_nso(x, target, prm, nso_opt, &hier);
      for (const auto& c : nrep.cycles) res->log.nso.push_back({outer, c});
      row.nso_resid = nrep.residual_inf;
    } catch (const Error& e) {
      rethrow_at(outer, e);
    }

    double diff = 0.0;
    for (int i = 0; i <= N; ++i) {
      const auto a = ao.rho[i].values();
      const auto b = rho_last[i].values();
      for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
    }
    row.visual_diff = diff;

    double aug = objective(ao.rho, keyframes, x.u, cfg.r, metric);
    for (int i = 0; i < N; ++i) {
      FaceField d(x.v[i]);
      axpy(-1.0, ao.vstar[i].values(), d.values());
      aug += dot(lambda[i], d) + 0.5 * cfg.K * sq_diff(x.v[i], ao.vstar[i]);
    }
    row.augmented = aug;
    for (int i = 0; i < N; ++i) {
      row.vstar_max = std::max(row.vstar_max, norm_inf(ao.vstar[i].values()));
      for (std::size_t k = 0; k < x.v[i].size(); ++k)
        row.primal_gap = std::max(row.primal_gap, std::abs(x.v[i][k] - ao.vstar[i][k]));
    }

    if (diff < eps) {
      row.wall_s = std::chrono::duration<double>(clock::now() - t0).count();
      res->log.outer.push_back(row);
      if (cfg.progress) cfg.progress(row);
      res->converged = true;
      finish(outer);
      return std::move(*res);
    }
    rho_last = ao.rho;
    bool update = true;
    if (cfg.fallback) update = outer > 1 && aug_prev - aug < cfg.fallback_tol * std::abs(aug_prev);
    if (update) {
      for (int i = 0; i < N; ++i) {
        FaceField d(x.v[i]);
        axpy(-1.0, ao.vstar[i].values(), d.values());
        axpy(cfg.K * cfg.beta, d.values(), lambda[i].values());
      }
    }
    aug_prev = aug;
    row.lambda_updated = update;
    row.wall_s = std::chrono::duration<double>(clock::now() - t0).count();
    res->log.outer.push_back(row);
    if (cfg.progress) cfg.progress(row);
  }
  finish(cfg.max_outer);
  throw AdmmMaxIterations("ADMM did not converge within " + std::to_string(cfg.max_outer) + " outer iterations", res);
}

}  // namespace smoke
