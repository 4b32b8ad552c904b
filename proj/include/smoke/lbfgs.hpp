#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace smoke {

struct LbfgsOptions {
  int history = 8;
  double c1 = 1e-4;  // Armijo constant
  int max_iters = 500;
  double grad_tol = 1e-10;  // 2-norm of the gradient
  int max_backtracks = 40;
};

struct LbfgsIteration {
  int iter = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  int evaluations = 0;
  double wall_s = 0.0;
};

enum class LbfgsStatus { GradientTolerance, StopCallback, MaxIterations, LineSearchFailure };
std::string to_string(LbfgsStatus s);

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd g;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  std::vector<LbfgsIteration> log;  // entry 0 is the starting point
};

/// f(x, grad) returns the objective and writes the gradient.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;
/// Called after every accepted step; returning true stops the run.
using StopTest = std::function<bool(const LbfgsIteration&, const Eigen::VectorXd&)>;

/// Two-loop recursion with backtracking Armijo line search. On a line
/// search failure the best iterate so far is returned with that status.
LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& opt = {},
                           const StopTest& stop = {});

}  // namespace smoke
