#include "smoke/baseline.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "smoke/errors.hpp"
#include "smoke/field_ops.hpp"
#include "smoke/poisson.hpp"
#include "smoke/self_advection.hpp"

namespace smoke {

namespace {

ScalarField misfit_adjoint(const ShootingProblem& pb, const ScalarField& rho, int i, double* energy) {
  ScalarField d(rho);
  axpy(-1.0, pb.keyframes.target(i).values(), d.values());
  if (pb.metric) {
    *energy += pb.metric->energy(d);
    return pb.metric->apply(d);
  }
  *energy += 0.5 * dot(d, d);
  return d;
}

std::size_t total_size(const std::vector<FaceField>& u) {
  std::size_t n = 0;
  for (const auto& f : u) n += f.size();
  return n;
}

}  // namespace

std::vector<double> flatten(const std::vector<FaceField>& u) {
  std::vector<double> x;
  x.reserve(total_size(u));
  for (const auto& f : u) x.insert(x.end(), f.values().begin(), f.values().end());
  return x;
}

void unflatten(const Eigen::VectorXd& x, std::vector<FaceField>& u) {
  if (static_cast<std::size_t>(x.size()) != total_size(u)) throw InvalidArgument("control vector size mismatch");
  std::size_t o = 0;
  for (auto& f : u)
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = x[static_cast<Eigen::Index>(o++)];
}

double objective_and_gradient(const ShootingProblem& pb, const std::vector<FaceField>& u,
                              std::vector<FaceField>& grad, AdjointWorkspace* wsp) {
  const int N = pb.keyframes.steps();
  if (static_cast<int>(u.size()) != N) throw InvalidArgument("force count must equal N");
  AdjointWorkspace local;
  AdjointWorkspace& ws = wsp ? *wsp : local;
  const GridSpec& spec = pb.rho0.spec();
  const double dt = pb.sim.dt;

  ws.trajectory = simulate(SimState::at_rest(pb.rho0), u, pb.sim, nullptr, &ws.tapes);
  ws.rho_adj.assign(N + 1, ScalarField(spec));
  ws.v_adj.assign(N + 1, FaceField(spec));
  grad.assign(N, FaceField(spec));

  double J = 0.0;
  for (int i = 0; i < N; ++i) {
    J += 0.5 * pb.r * dot(u[i], u[i]);
    copy(u[i].values(), grad[i].values());
    scale(grad[i].values(), pb.r);
  }
  if (pb.keyframes.has(N)) ws.rho_adj[N] = misfit_adjoint(pb, ws.trajectory[N].rho, N, &J);

  for (int i = N - 1; i >= 0; --i) {
    const StepTape& tape = ws.tapes[i];
    const SimState& s = ws.trajectory[i];
    // density: rho_{i+1} = A(rho_i, v_i)
    AdvectionOperator adv(s.v, pb.sim.advection);
    ScalarField ra = adv.jacobian_rho_T(ws.rho_adj[i + 1], dt, tape.density_terms);
    FaceField va = adv.jacobian_v_T(s.rho, ws.rho_adj[i + 1], dt, tape.density_terms);
    if (pb.keyframes.has(i)) {
      double e = 0.0;
      axpy(1.0, misfit_adjoint(pb, s.rho, i, &e).values(), ra.values());
      J += e;
    }
    ws.rho_adj[i] = std::move(ra);

    // velocity: w^{m+1} = Q(v_i + dt u_i - dt Adv(w^m)), w^0 = v_i
    FaceField cur(ws.v_adj[i + 1]);
    const int M = static_cast<int>(tape.iterates.size()) - 1;
    for (int m = M - 1; m >= 0; --m) {
      FaceField z = project_solenoidal(cur, pb.sim.projection_tol);
      axpy(dt, z.values(), grad[i].values());
      axpy(1.0, z.values(), va.values());
      cur = self_advection_vjp(tape.iterates[m], z);
      scale(cur.values(), -dt);
    }
    axpy(1.0, cur.values(), va.values());
    ws.v_adj[i] = std::move(va);
  }
  return J;
}

BaselineResult minimize(const ShootingProblem& pb, const BaselineOptions& opt) {
  pb.keyframes.validate();
  validate(pb.sim);
  const int N = pb.keyframes.steps();
  const GridSpec& spec = pb.rho0.spec();
  const double eps = opt.eps_visual > 0.0 ? opt.eps_visual : default_eps_admm(pb.rho0);

  std::vector<FaceField> u(N, FaceField(spec)), g(N, FaceField(spec));
  AdjointWorkspace ws;
  std::vector<ScalarField> rho_prev, rho_best;
  const auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    unflatten(x, u);
    double J;
    try {
      J = objective_and_gradient(pb, u, g, &ws);
    } catch (const Error& e) {
      // a trial step too large for the simulator; the line search backs off
      if (!dynamic_cast<const TruncationOverflow*>(&e) && !dynamic_cast<const NonConvergence*>(&e)) throw;
      grad.setZero();
      return std::numeric_limits<double>::infinity();
    }
    grad = Eigen::Map<const Eigen::VectorXd>(flatten(g).data(), grad.size());
    return J;
  };

  BaselineResult out;
  ControlResult& cr = out.control;
  cr.eps_admm = eps;
  bool met = false;
  // Densities of the accepted iterate are those of the last evaluation.
  const auto stop = [&](const LbfgsIteration& it, const Eigen::VectorXd&) {
    std::vector<ScalarField> rho;
    for (const auto& s : ws.trajectory) rho.push_back(s.rho);
    double diff = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
      for (std::size_t k = 0; k < rho[i].size(); ++k) diff = std::max(diff, std::abs(rho[i][k] - rho_prev[i][k]));
    rho_prev = std::move(rho);
    AdmmLogRow row;
    row.outer_iter = it.iter;
    row.ao_obj = it.f;
    row.nso_resid = it.grad_norm;
    row.visual_diff = diff;
    row.wall_s = it.wall_s;
    cr.log.outer.push_back(row);
    // shortened steps move the densities little without being converged
    met = met || (diff < eps && it.step == 1.0);
    return met || (opt.max_wall_s > 0.0 && it.wall_s > opt.max_wall_s);
  };

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N * FaceField(spec).size()));
  {
    Eigen::VectorXd g0(x0.size());
    f(x0, g0);
    for (const auto& s : ws.trajectory) rho_prev.push_back(s.rho);
  }
  out.lbfgs = lbfgs_minimize(f, x0, opt.lbfgs, stop);

  unflatten(out.lbfgs.x, u);
  std::vector<FaceField> gfin;
  out.objective = objective_and_gradient(pb, u, gfin, &ws);
  cr.trajectory = ws.trajectory;
  cr.forces = u;
  cr.outer_iters = static_cast<int>(out.lbfgs.log.size()) - 1;
  cr.converged = met || out.lbfgs.status == LbfgsStatus::GradientTolerance;
  cr.wall_s = out.lbfgs.log.back().wall_s;
  return out;
}

}  // namespace smoke
