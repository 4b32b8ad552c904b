#include "smoke/ao_solver.hpp"

#include "smoke/errors.hpp"
#include "smoke/field_ops.hpp"
#include "smoke/poisson.hpp"

namespace smoke {

namespace {

int steps_of(const AoProblem& pb) { return pb.keyframes.steps(); }

void check(const AoProblem& pb, const std::vector<FaceField>& guide) {
  const int N = steps_of(pb);
  if (static_cast<int>(guide.size()) != N) throw InvalidArgument("guide length must equal N");
  if (!(pb.K > 0.0) || !(pb.dt > 0.0)) throw InvalidArgument("K and dt must be positive");
  for (const auto& g : guide)
    if (g.spec() != pb.rho0.spec()) throw SpecMismatch("guide velocity on a different grid");
}

ScalarField mismatch(const AoProblem& pb, const AoState& st, int i) {
  ScalarField d(st.rho[i]);
  axpy(-1.0, pb.keyframes.target(i).values(), d.values());
  return d;
}

template <class F>
auto annotate(const char* phase, int i, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const TruncationOverflow& e) {
    throw TruncationOverflow(std::string(phase) + " step " + std::to_string(i) + ": " + e.what());
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string(phase) + " step " + std::to_string(i) + ": " + e.what(), e.residual);
  }
}

}  // namespace

void ao_forward(const AoProblem& pb, AoState& st) {
  const int N = steps_of(pb);
  st.rho.resize(N + 1);
  st.terms.assign(N, 0);
  st.rho[0] = pb.rho0;
  for (int i = 1; i <= N; ++i) {
    annotate("forward", i - 1, [&] {
      AdvectionOperator op(st.vstar[i - 1], pb.advection);
      auto [r, rep] = op.advect(st.rho[i - 1], pb.dt);
      st.rho[i] = std::move(r);
      st.terms[i - 1] = rep.k_used;
    });
  }
}

double ao_misfit(const AoProblem& pb, const AoState& st) {
  double e = 0.0;
  for (int i : pb.keyframes.indices()) e += pb.metric.energy(mismatch(pb, st, i));
  return e;
}

double ao_objective(const AoProblem& pb, const std::vector<FaceField>& guide, AoState& st) {
  check(pb, guide);
  ao_forward(pb, st);
  double e = ao_misfit(pb, st);
  for (std::size_t i = 0; i < guide.size(); ++i) {
    FaceField d(guide[i]);
    axpy(-1.0, st.vstar[i].values(), d.values());
    e += 0.5 * pb.K * dot(d, d);
  }
  return e;
}

void ao_sweep(const AoProblem& pb, const std::vector<FaceField>& guide, AoState& st) {
  check(pb, guide);
  const int N = steps_of(pb);
  ao_forward(pb, st);
  st.mu.assign(N, ScalarField(pb.rho0.spec()));
  for (int i = N; i >= 1; --i) {
    // mu_{i-1}
    ScalarField m(pb.rho0.spec());
    if (i < N) {
      m = annotate("backward", i, [&] {
        AdvectionOperator op(st.vstar[i], pb.advection);
        return op.jacobian_rho_T(st.mu[i], pb.dt).first;
      });
    }
    if (pb.keyframes.has(i)) {
      const ScalarField cm = pb.metric.apply(mismatch(pb, st, i));
      axpy(-1.0, cm.values(), m.values());
    }
    st.mu[i - 1] = std::move(m);
    // v*_{i-1}
    st.vstar[i - 1] = annotate("backward", i - 1, [&] {
      AdvectionOperator op(st.vstar[i - 1], pb.advection);
      FaceField w = op.jacobian_v_T(st.rho[i - 1], st.mu[i - 1], pb.dt, st.terms[i - 1]);
      scale(w.values(), 1.0 / pb.K);
      axpy(1.0, guide[i - 1].values(), w.values());
      return project_solenoidal(w, pb.projection_tol);
    });
  }
}

std::vector<FaceField> ao_misfit_gradient(const AoProblem& pb, const AoState& st) {
  const int N = steps_of(pb);
  std::vector<FaceField> g(N);
  ScalarField lam(pb.rho0.spec());  // d misfit / d rho_{i}
  for (int i = N; i >= 1; --i) {
    ScalarField a(pb.rho0.spec());
    if (i < N) {
      AdvectionOperator op(st.vstar[i], pb.advection);
      a = op.jacobian_rho_T(lam, pb.dt, st.terms[i]);
    }
    if (pb.keyframes.has(i)) axpy(1.0, pb.metric.apply(mismatch(pb, st, i)).values(), a.values());
    lam = std::move(a);
    AdvectionOperator op(st.vstar[i - 1], pb.advection);
    g[i - 1] = op.jacobian_v_T(st.rho[i - 1], lam, pb.dt, st.terms[i - 1]);
  }
  return g;
}

AoState solve_ao(const AoProblem& pb, const std::vector<FaceField>& guide, const AoOptions& opt,
                 const std::vector<FaceField>* init, AoReport* report) {
  check(pb, guide);
  if (opt.iters < 1) throw InvalidArgument("AO iteration count must be >= 1");
  AoState st;
  if (init) {
    if (init->size() != guide.size()) throw InvalidArgument("initial guess length must equal N");
    st.vstar = *init;
  } else {
    st.vstar.reserve(guide.size());
    for (const auto& g : guide) st.vstar.push_back(project_solenoidal(g, pb.projection_tol));
  }
  AoReport rep;
  double f_old = ao_objective(pb, guide, st);
  rep.objective.push_back(f_old);
  for (int it = 0; it < opt.iters; ++it) {
    if (!opt.safeguard) {
      ao_sweep(pb, guide, st);
      const double f = ao_objective(pb, guide, st);
      rep.objective.push_back(f);
      rep.alpha.push_back(1.0);
      continue;
    }
    const std::vector<FaceField> prev = st.vstar;
    ao_sweep(pb, guide, st);
    const std::vector<FaceField> cand = st.vstar;
    std::vector<ScalarField> mu = st.mu;
    double alpha = 1.0;
    double f = ao_objective(pb, guide, st);
    int h = 0;
    while (f > f_old && h < opt.max_halvings) {
      alpha *= 0.5;
      ++h;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        st.vstar[i] = prev[i];
        scale(st.vstar[i].values(), 1.0 - alpha);
        axpy(alpha, cand[i].values(), st.vstar[i].values());
      }
      f = ao_objective(pb, guide, st);
    }
    if (f > f_old) {
      alpha = 0.0;
      st.vstar = prev;
      f = ao_objective(pb, guide, st);
    }
    st.mu = std::move(mu);
    rep.objective.push_back(f);
    rep.alpha.push_back(alpha);
    f_old = f;
  }
  if (report) *report = std::move(rep);
  return st;
}

}  // namespace smoke
