// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is 0 once every criterion has been evaluated; --strict makes
// any FAIL nonzero.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "identities.hpp"
#include "nso_oracle.hpp"
#include "smoke/admm.hpp"
#include "smoke/baseline.hpp"
#include "smoke/benchmarks.hpp"
#include "smoke/memory.hpp"
#include "smoke/simulator.hpp"
#include "smoke/stfas.hpp"
#include "support.hpp"

using namespace smoke;

namespace {

// criterion 1
constexpr double kRateMax = 0.75;
constexpr double kRateSpread = 0.15;
constexpr double kRateAmp = 0.01;
// criterion 2
constexpr int kOuterBound = 50;
constexpr int kBenchRes = 64;
constexpr int kBenchSteps = 20;
constexpr double kBenchDt = 2.0;
// criterion 3
constexpr double kSpeedup = 5.0;
constexpr double kLbfgsInfoCap = 600.0;  // wall cap when ADMM itself did not converge
// criterion 4
constexpr int kSweepRes = 32;
constexpr int kSweepSteps = 10;
// criterion 5
constexpr double kOracleTol = 1e-6;
// criterion 7
constexpr int kPropertyCases = 100;
constexpr double kDivTol = 1e-6;
constexpr double kNormDrift = 1e-3;
constexpr double kMassDrift = 1e-4;
// criterion 8
constexpr double kMemoryFactor = 1.5;

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

AdmmConfig benchmark_config(double r = 1e3) {
  AdmmConfig c;  // K, beta, ao_iters, eps_stfas, eps_admm at their defaults
  c.r = r;
  c.dt = kBenchDt;
  c.safeguard = true;
  c.lm = true;
  return c;
}

ControlResult run_admm(const Benchmark& bm, const AdmmConfig& c) {
  try {
    return run(bm.rho0, bm.keyframes, c);
  } catch (const AdmmMaxIterations& e) {
    return *e.result;
  }
}

struct Shared {
  std::map<std::string, ControlResult> admm64;
  std::map<std::string, Benchmark> bench64;
};

Outcome c1_stfas_rates() {
  Outcome o;
  std::vector<double> avgs;
  for (auto [n, N] : {std::pair{16, 8}, std::pair{32, 8}, std::pair{32, 16}}) {
    auto s = GridSpec::square(n, 1.0 / n, Boundary::Neumann);
    const NsoParams prm;
    std::vector<FaceField> vs;
    for (int i = 0; i < N; ++i) vs.push_back(test::vortex(s, kRateAmp, 0.7 * i));
    auto x = SpacetimeFields::zeros(s, N);
    StfasHierarchy h(s, N);
    double prev = h.residual_norms(x, vs, prm).first, sum = 0.0;
    std::string rates;
    for (int c = 1; c <= 6; ++c) {
      h.vcycle(x, vs, prm);
      const double r = h.residual_norms(x, vs, prm).first;
      if (c >= 2) {
        sum += r / prev;
        rates += fmt(" %.3f", r / prev);
      }
      prev = r;
    }
    avgs.push_back(sum / 5);
    o.details.push_back(fmt("%dx%d N=%d: factors cycles 2-6:%s  average %.3f", n, n, N, rates.c_str(), avgs.back()));
  }
  const double mx = *std::max_element(avgs.begin(), avgs.end());
  const double spread = mx - *std::min_element(avgs.begin(), avgs.end());
  o.pass = mx <= kRateMax && spread < kRateSpread;
  o.summary = fmt("worst average factor %.3f (<= %.2f), spread %.3f (< %.2f)", mx, kRateMax, spread, kRateSpread);
  return o;
}

Outcome c2_outer_bound(Shared& sh) {
  Outcome o;
  o.pass = true;
  std::string parts;
  for (const std::string name : {"blob", "letter"}) {
    sh.bench64.emplace(name, make_benchmark(name, kBenchRes, kBenchSteps));
    const auto& bm = sh.bench64.at(name);
    auto cfg = benchmark_config();
    cfg.max_outer = kOuterBound;
    const auto t0 = std::chrono::steady_clock::now();
    auto res = run_admm(bm, cfg);
    const double wall = seconds_since(t0);
    const bool ok = res.converged && res.outer_iters <= kOuterBound;
    o.pass = o.pass && ok;
    const auto& last = res.log.outer.back();
    o.details.push_back(fmt("%s %dx%d N=%d dt=%.1f: %s after %d outer iterations, last visual diff %.4g (eps %.4g), %.0f s",
                            name.c_str(), kBenchRes, kBenchRes, kBenchSteps, kBenchDt,
                            res.converged ? "converged" : "not converged", res.outer_iters, last.visual_diff,
                            res.eps_admm, wall));
    parts += fmt("%s %s/%d; ", name.c_str(), res.converged ? std::to_string(res.outer_iters).c_str() : ">", kOuterBound);
    sh.admm64.emplace(name, std::move(res));
  }
  o.summary = "outer iterations: " + parts;
  return o;
}

Outcome c3_speedup(Shared& sh) {
  Outcome o;
  const auto& bm = sh.bench64.at("blob");
  const auto& admm = sh.admm64.at("blob");
  GaussianMetric metric(bm.rho0.spec());
  SimConfig sim;
  sim.dt = kBenchDt;
  const ShootingProblem pb{bm.rho0, bm.keyframes, &metric, 1e3, sim};
  BaselineOptions bo;
  bo.eps_visual = admm.eps_admm;
  bo.max_wall_s = admm.converged ? kSpeedup * admm.wall_s * 1.01 : std::min(kSpeedup * admm.wall_s, kLbfgsInfoCap);
  const auto lb = minimize(pb, bo);
  std::vector<ScalarField> rho;
  for (const auto& s : admm.trajectory) rho.push_back(s.rho);
  const double admm_obj = objective(rho, bm.keyframes, admm.forces, 1e3, metric);
  o.details.push_back(fmt("ADMM : %s, %d iterations, %.1f s, objective %.5g", admm.converged ? "converged" : "not converged",
                          admm.outer_iters, admm.wall_s, admm_obj));
  o.details.push_back(fmt("LBFGS: %s (%s), %d iterations, %.1f s, objective %.5g",
                          lb.control.converged ? "met the stopping rule" : "did not meet the stopping rule",
                          to_string(lb.lbfgs.status).c_str(), lb.control.outer_iters, lb.control.wall_s, lb.objective));
  if (!admm.converged) {
    o.pass = false;
    o.summary = "ADMM did not meet the stopping rule within the outer bound; no matched comparison";
  } else if (lb.control.converged) {
    const double ratio = lb.control.wall_s / admm.wall_s;
    o.pass = ratio >= kSpeedup;
    o.summary = fmt("LBFGS / ADMM wall time %.2fx (>= %.0fx)", ratio, kSpeedup);
  } else {
    o.pass = true;
    o.summary = fmt("LBFGS had not met the stopping rule after %.1f s = %.2fx the ADMM time (>= %.0fx)",
                    lb.control.wall_s, lb.control.wall_s / admm.wall_s, kSpeedup);
    if (lb.lbfgs.status == LbfgsStatus::LineSearchFailure) {
      o.pass = lb.control.wall_s >= kSpeedup * admm.wall_s;
      o.summary = fmt("LBFGS stopped on a line search failure after %.1f s without meeting the stopping rule",
                      lb.control.wall_s);
    }
  }
  return o;
}

Outcome c4_regularisation() {
  Outcome o;
  const auto bm = make_benchmark("blob", kSweepRes, kSweepSteps);
  std::vector<double> mismatch, force;
  std::vector<int> iters;
  for (double r : {1e2, 1e3, 1e4}) {
    const auto res = run_admm(bm, benchmark_config(r));
    double e = 0.0;
    for (const auto& u : res.forces) e += dot(u, u);
    double m = 0.0;
    for (int i : bm.keyframes.indices()) {
      ScalarField d(res.trajectory[i].rho);
      axpy(-1.0, bm.keyframes.target(i).values(), d.values());
      m += 0.5 * dot(d, d);
    }
    mismatch.push_back(m);
    force.push_back(e);
    iters.push_back(res.outer_iters);
    o.details.push_back(fmt("r=%.0e: %s in %d outer iterations, keyframe mismatch %.5g, sum |u|^2 %.4g", r,
                            res.converged ? "converged" : "not converged", res.outer_iters, m, e));
  }
  o.pass = mismatch[0] <= mismatch[1] && mismatch[1] <= mismatch[2] && force[0] >= force[1] && force[1] >= force[2];
  const bool it_mono = iters[0] <= iters[1] && iters[1] <= iters[2];
  o.summary = fmt("mismatch non-decreasing and force energy non-increasing in r: %s", o.pass ? "yes" : "no");
  o.details.push_back(fmt("outer iteration counts %d, %d, %d: %s in r (reported, not scored)", iters[0], iters[1],
                          iters[2], it_mono ? "non-decreasing" : "not non-decreasing"));
  return o;
}

double field_gap(const SpacetimeFields& a, const SpacetimeFields& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    m = std::max(m, test::max_abs_diff(a.v[i].values(), b.v[i].values()));
    m = std::max(m, test::max_abs_diff(a.pbar[i].values(), b.pbar[i].values()));
  }
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    m = std::max(m, test::max_abs_diff(a.u[i].values(), b.u[i].values()));
    m = std::max(m, test::max_abs_diff(a.p[i].values(), b.p[i].values()));
  }
  return m;
}

Outcome c5_oracle() {
  Outcome o;
  double worst = 0.0;
  for (auto [b, r, amp] : {std::tuple{Boundary::Neumann, 1e3, 0.1}, std::tuple{Boundary::Periodic, 100.0, 0.05}}) {
    auto s = GridSpec::square(6, 1.0 / 6, b);
    const NsoParams prm{1e3, r, 0.4};
    std::vector<FaceField> vs;
    for (int i = 0; i < 3; ++i) vs.push_back(test::vortex(s, amp, 0.7 * i));
    const auto ref = test::DenseKkt(s, 3, vs, prm).solve();
    auto x = SpacetimeFields::zeros(s, 3);
    NsoOptions opt;
    opt.eps = 1e-11;
    opt.cycle_budget = 200;
    const auto rep = solve_nso(x, vs, prm, opt);
    remove_pressure_means(x);
    const double gap = field_gap(ref, x);
    worst = std::max(worst, gap);
    o.details.push_back(fmt("%s r=%g: %zu V-cycles, max field difference %.3e", to_string(b).c_str(), r,
                            rep.cycles.size() - 1, gap));
  }
  o.pass = worst <= kOracleTol;
  o.summary = fmt("6x6 N=3 max field difference %.3e (<= %.0e)", worst, kOracleTol);
  return o;
}

Outcome c6_identities() {
  Outcome o;
  int ok = 0;
  const auto ids = test::all_identities();
  for (const auto& id : ids) {
    ok += id.ok();
    o.details.push_back(fmt("%-4s %-66s %.3e <= %.0e", id.ok() ? "ok" : "FAIL", id.name.c_str(), id.err, id.tol));
  }
  o.pass = ok == static_cast<int>(ids.size());
  o.summary = fmt("%d of %zu identities within tolerance", ok, ids.size());
  return o;
}

Outcome c7_conservation() {
  Outcome o;
  std::mt19937_64 rng(2024);
  int div_fail = 0, norm_fail = 0, mass_fail = 0, cases = 0;
  double worst_div = 0.0, worst_norm = 0.0, worst_mass = 0.0;
  for (int t = 0; t < kPropertyCases; ++t) {
    const int n = t % 2 ? 8 : 12;
    auto s = GridSpec::square(n, 1.0 / n, t % 3 ? Boundary::Periodic : Boundary::Neumann);
    auto rho = test::random_scalar(s, rng, 0.0, 1.0);
    std::vector<FaceField> u(3);
    for (auto& f : u) f = test::random_face(s, rng, 0.1);
    const auto traj = simulate(SimState::at_rest(rho), u, SimConfig{});
    for (const auto& st : traj) {
      const double scale = std::max(norm_inf(st.v.values()), 1e-12) / s.h;
      const double d = norm_inf(divergence(st.v).values()) / scale;
      worst_div = std::max(worst_div, d);
      div_fail += d > kDivTol;
    }
    ++cases;
  }
  for (int t = 0; t < kPropertyCases; ++t) {
    const int n = t % 2 ? 16 : 12;
    auto s = GridSpec::square(n, 1.0 / n, Boundary::Periodic);
    auto v = test::random_solenoidal(s, rng, 0.05 + 0.1 * (t % 5));
    auto rho = test::random_scalar(s, rng, 0.0, 1.0);
    const auto out = AdvectionOperator(v).advect(rho, 0.4).first;
    const double dn = std::abs(norm2(out.values()) - norm2(rho.values())) / norm2(rho.values());
    const double dm = std::abs(sum(out.values()) - sum(rho.values())) / sum(rho.values());
    worst_norm = std::max(worst_norm, dn);
    worst_mass = std::max(worst_mass, dm);
    norm_fail += dn > kNormDrift;
    mass_fail += dm > kMassDrift;
    ++cases;
  }
  // mass over whole forced rollouts as well
  for (int t = 0; t < kPropertyCases / 2; ++t) {
    auto s = GridSpec::square(12, 1.0 / 12, Boundary::Periodic);
    auto rho = test::random_scalar(s, rng, 0.0, 1.0);
    std::vector<FaceField> u(4);
    for (auto& f : u) f = test::random_face(s, rng, 0.1);
    const auto traj = simulate(SimState::at_rest(rho), u, SimConfig{});
    const double dm = std::abs(sum(traj.back().rho.values()) - sum(rho.values())) / sum(rho.values());
    worst_mass = std::max(worst_mass, dm);
    mass_fail += dm > kMassDrift;
    ++cases;
  }
  o.pass = div_fail == 0 && norm_fail == 0 && mass_fail == 0 && cases >= kPropertyCases;
  o.summary = fmt("%d randomized cases, %d failures", cases, div_fail + norm_fail + mass_fail);
  o.details.push_back(fmt("scaled divergence worst %.3e (<= %.0e)", worst_div, kDivTol));
  o.details.push_back(fmt("periodic 2-norm drift worst %.3e (<= %.0e)", worst_norm, kNormDrift));
  o.details.push_back(fmt("periodic total density drift worst %.3e (<= %.0e)", worst_mass, kMassDrift));
  return o;
}

Outcome c8_memory() {
  Outcome o;
  auto s = GridSpec::square(32, 1.0 / 32, Boundary::Neumann);
  const int N = 16;
  std::vector<FaceField> vs;
  for (int i = 0; i < N; ++i) vs.push_back(test::vortex(s, 0.01, 0.7 * i));
  auto x = SpacetimeFields::zeros(s, N);
  const long long base = payload::live();
  payload::reset_peak();
  solve_nso(x, vs, NsoParams{});
  const long long used = payload::peak() - base;
  const long long bound = 8LL * 32 * 32 * (1 + 2) * N;
  o.pass = used <= kMemoryFactor * bound;
  o.summary = fmt("peak payload %lld values = %.2f x 8 n^d (1+d) N (<= %.1f)", used, double(used) / bound, kMemoryFactor);
  return o;
}

Outcome c9_popping(Shared& sh) {
  Outcome o;
  for (const std::string name : {"blob", "letter"}) {
    const auto& bm = sh.bench64.at(name);
    const auto& res = sh.admm64.at(name);
    ScalarField a = bm.rho0, b = bm.rho0;
    double ma = 0.0, mb = 0.0;
    for (const auto& v : res.vstar) {
      auto a2 = AdvectionOperator(v).advect(a, kBenchDt).first;
      auto b2 = semi_lagrangian(b, v, kBenchDt);
      ma = std::max(ma, test::max_abs_diff(a2.values(), a.values()));
      mb = std::max(mb, test::max_abs_diff(b2.values(), b.values()));
      a = std::move(a2);
      b = std::move(b2);
    }
    o.details.push_back(fmt("%s: max per-frame change, exponential upwind %.4f, semi-Lagrangian %.4f", name.c_str(), ma, mb));
    if (name == "blob") {
      o.pass = ma < mb;
      o.summary = fmt("blob at dt=%.1f: %.4f (exponential) vs %.4f (semi-Lagrangian)", kBenchDt, ma, mb);
    }
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string report;
  bool strict = false;
  app.add_option("--only", only, "criteria to run (default all)")->delimiter(',');
  app.add_option("--report", report, "also write the report to this file");
  app.add_flag("--strict", strict, "exit nonzero when a criterion fails");
  CLI11_PARSE(app, argc, argv);
  auto wanted = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };
  // 3 and 9 reuse the optimised 64x64 runs of 2
  if (wanted(3) || wanted(9))
    if (!wanted(2)) only.push_back(2);

  Shared sh;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, c1_stfas_rates},
      {2, [&] { return c2_outer_bound(sh); }},
      {3, [&] { return c3_speedup(sh); }},
      {4, c4_regularisation},
      {5, c5_oracle},
      {6, c6_identities},
      {7, c7_conservation},
      {8, c8_memory},
      {9, [&] { return c9_popping(sh); }},
  };
  std::ostringstream rep;
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!wanted(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    failed += !o.pass;
    std::ostringstream line;
    line << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.summary
         << fmt("  [%.0f s]", seconds_since(t0)) << "\n";
    for (const auto& d : o.details) line << "    " << d << "\n";
    std::fputs(line.str().c_str(), stdout);
    std::fflush(stdout);
    rep << line.str();
  }
  std::printf("%d criteria failed\n", failed);
  rep << failed << " criteria failed\n";
  if (!report.empty()) std::ofstream(report) << rep.str();
  return strict && failed ? 1 : 0;
}
