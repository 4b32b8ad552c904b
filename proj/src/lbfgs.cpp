#include "smoke/lbfgs.hpp"

#include <chrono>
#include <cmath>
#include <deque>

#include "smoke/errors.hpp"

namespace smoke {

std::string to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::GradientTolerance: return "gradient_tolerance";
    case LbfgsStatus::StopCallback: return "stop_criterion";
    case LbfgsStatus::MaxIterations: return "max_iterations";
    case LbfgsStatus::LineSearchFailure: return "line_search_failure";
  }
  return "unknown";
}

LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x, const LbfgsOptions& opt, const StopTest& stop) {
  if (opt.history < 1 || opt.max_iters < 0 || !(opt.c1 > 0.0 && opt.c1 < 1.0))
    throw InvalidArgument("invalid LBFGS options");
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> mem;

  LbfgsResult res;
  Eigen::VectorXd g(x.size());
  double fx = f(x, g);
  int evals = 1;
  res.log.push_back({0, fx, g.norm(), 0.0, evals, elapsed()});
  res.status = LbfgsStatus::MaxIterations;

  Eigen::VectorXd d, xn, gn(x.size());
  std::vector<double> alpha;
  for (int it = 1; it <= opt.max_iters; ++it) {
    if (g.norm() <= opt.grad_tol) {
      res.status = LbfgsStatus::GradientTolerance;
      break;
    }
    // two-loop recursion
    d = -g;
    alpha.assign(mem.size(), 0.0);
    for (int k = static_cast<int>(mem.size()) - 1; k >= 0; --k) {
      alpha[k] = mem[k].rho * mem[k].s.dot(d);
      d -= alpha[k] * mem[k].y;
    }
    if (!mem.empty()) d *= mem.back().s.dot(mem.back().y) / mem.back().y.squaredNorm();
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double b = mem[k].rho * mem[k].y.dot(d);
      d += (alpha[k] - b) * mem[k].s;
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      mem.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    double step = mem.empty() && it == 1 ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    bool accepted = false;
    double fn = 0.0;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
      xn = x + step * d;
      fn = f(xn, gn);
      ++evals;
      if (!std::isfinite(fn)) {
        step *= 0.5;
        continue;
      }
      // Near the minimum the decrease drowns in rounding; fall back to the
      // approximate Armijo test on the directional derivative.
      const double dn = gn.dot(d);
      const bool approx = fn <= fx + 1e-12 * std::abs(fx) && dn <= (2.0 * opt.c1 - 1.0) * slope && dn >= 0.9 * slope;
      if (fn <= fx + opt.c1 * step * slope || approx) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.status = LbfgsStatus::LineSearchFailure;
      break;
    }
    Pair p{xn - x, gn - g, 0.0};
    const double sy = p.s.dot(p.y);
    if (sy > 1e-12 * p.s.norm() * p.y.norm()) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > opt.history) mem.pop_front();
    }
    x = xn;
    g = gn;
    fx = fn;
    LbfgsIteration rec{it, fx, g.norm(), step, evals, elapsed()};
    res.log.push_back(rec);
    if (stop && stop(rec, x)) {
      res.status = LbfgsStatus::StopCallback;
      break;
    }
  }
  if (res.status == LbfgsStatus::MaxIterations && g.norm() <= opt.grad_tol) res.status = LbfgsStatus::GradientTolerance;
  res.x = std::move(x);
  res.f = fx;
  res.g = std::move(g);
  return res;
}

}  // namespace smoke
