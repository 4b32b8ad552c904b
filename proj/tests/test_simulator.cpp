#include <doctest.h>

#include <Eigen/Dense>

#include "smoke/errors.hpp"
#include "smoke/self_advection.hpp"
#include "smoke/simulator.hpp"
#include "support.hpp"

using namespace smoke;
using smoke::test::max_abs_diff;

namespace {

// Newton on the implicit step: F(w, q) = [(w - v)/dt + Adv(w) - u + grad q ; div w],
// with the pressure mean pinned by a bordering row.
FaceField newton_step(const FaceField& v, const FaceField& u, double dt) {
  const GridSpec& s = v.spec();
  const int nf = static_cast<int>(v.size()), nc = static_cast<int>(s.cell_count());
  const int n = nf + nc + 1;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  auto unpack = [&](const Eigen::VectorXd& x, FaceField& w, ScalarField& q) {
    for (int i = 0; i < nf; ++i) w[i] = x[i];
    for (int i = 0; i < nc; ++i) q[i] = x[nf + i];
  };
  auto residual = [&](const Eigen::VectorXd& x) {
    FaceField w(s);
    ScalarField q(s);
    unpack(x, w, q);
    FaceField r(w);
    axpy(-1.0, v.values(), r.values());
    scale(r.values(), 1.0 / dt);
    self_advection_add(w, r);
    axpy(-1.0, u.values(), r.values());
    add_gradient(q, 1.0, r);
    auto d = divergence(w);
    Eigen::VectorXd out(n);
    for (int i = 0; i < nf; ++i) out[i] = r[i];
    for (int i = 0; i < nc; ++i) out[nf + i] = d[i] + x[n - 1];
    out[n - 1] = 0.0;
    for (int i = 0; i < nc; ++i) out[n - 1] += q[i];
    return out;
  };
  for (int it = 0; it < 20; ++it) {
    Eigen::VectorXd F = residual(z);
    if (F.cwiseAbs().maxCoeff() < 1e-13) break;
    Eigen::MatrixXd J(n, n);
    for (int c = 0; c < n; ++c) {
      Eigen::VectorXd zp = z, zm = z;
      zp[c] += 1e-4;
      zm[c] -= 1e-4;
      J.col(c) = (residual(zp) - residual(zm)) / 2e-4;  // exact for a quadratic residual
    }
    z -= J.partialPivLu().solve(F);
  }
  FaceField w(s);
  ScalarField q(s);
  unpack(z, w, q);
  return w;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("rest state stays at rest") {
  auto s = GridSpec::square(16, 1.0 / 16, Boundary::Neumann);
  std::mt19937_64 rng(31);
  auto rho = test::random_scalar(s, rng, 0.0, 1.0);
  auto traj = simulate(SimState::at_rest(rho), std::vector<FaceField>(5, FaceField(s)), SimConfig{});
  REQUIRE(traj.size() == 6);
  for (const auto& st : traj) {
    CHECK(norm_inf(st.v.values()) == 0.0);
    CHECK(max_abs_diff(st.rho.values(), rho.values()) == 0.0);
  }
}

TEST_CASE("zero steps returns the initial state") {
  auto s = GridSpec::square(8, 1.0 / 8, Boundary::Periodic);
  ScalarField rho(s, 0.5);
  auto traj = simulate(SimState::at_rest(rho), {}, SimConfig{});
  CHECK(traj.size() == 1);
}

TEST_CASE("Picard step converges to the Newton solution of the implicit step") {
  auto s = GridSpec::square(8, 1.0 / 8, Boundary::Periodic);
  std::mt19937_64 rng(32);
  auto v = test::random_solenoidal(s, rng, 0.2);
  auto u = test::random_face(s, rng, 0.3);
  SimConfig cfg;
  cfg.dt = 0.4;
  cfg.picard_iters = 60;
  cfg.sim_tol = 1e-13;
  cfg.projection_tol = 1e-13;
  StepReport rep;
  auto next = step(SimState{v, ScalarField(s), ScalarField(s)}, u, cfg, &rep);
  CHECK(rep.converged);
  auto ref = newton_step(v, u, cfg.dt);
  CHECK(max_abs_diff(next.v.values(), ref.values()) < 1e-9);
}

TEST_CASE("strict mode reports a stalled Picard iteration") {
  auto s = GridSpec::square(8, 1.0 / 8, Boundary::Periodic);
  std::mt19937_64 rng(33);
  SimConfig cfg;
  cfg.picard_iters = 1;
  cfg.strict = true;
  auto st = SimState{test::random_solenoidal(s, rng, 1.0), ScalarField(s), ScalarField(s)};
  CHECK_THROWS_AS(step(st, test::random_face(s, rng), cfg), NonConvergence);
}

TEST_CASE("velocities stay divergence-free and mass is conserved (periodic)") {
  std::mt19937_64 rng(34);
  int cases = 0;
  for (int t = 0; t < 100; ++t) {
    auto s = GridSpec::square(t % 2 ? 8 : 12, 1.0 / 12, t % 3 ? Boundary::Periodic : Boundary::Neumann);
    auto rho = test::random_scalar(s, rng, 0.0, 1.0);
    std::vector<FaceField> u(3);
    for (auto& f : u) f = test::random_face(s, rng, 0.1);
    SimConfig cfg;
    auto traj = simulate(SimState::at_rest(rho), u, cfg);
    for (const auto& st : traj) {
      const double scale = std::max(norm_inf(st.v.values()), 1e-12) / s.h;
      CHECK(norm_inf(divergence(st.v).values()) <= 1e-6 * scale);
    }
    if (s.periodic()) {
      const double m0 = sum(rho.values());
      CHECK(std::abs(sum(traj.back().rho.values()) - m0) <= 1e-4 * m0);
    }
    ++cases;
  }
  CHECK(cases >= 100);
}

TEST_CASE("tape records every Picard iterate") {
  auto s = GridSpec::square(8, 1.0 / 8, Boundary::Neumann);
  std::mt19937_64 rng(35);
  SimConfig cfg;
  cfg.picard_iters = 4;
  cfg.sim_tol = 1e-30;
  StepTape tape;
  StepReport rep;
  step(SimState::at_rest(ScalarField(s, 1.0)), test::random_face(s, rng, 0.2), cfg, &rep, &tape);
  CHECK(rep.picard_used == 4);
  CHECK(tape.iterates.size() == 5);
}

}
