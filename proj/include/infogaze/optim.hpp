#pragma once

#include <Eigen/Dense>
#include <functional>

#include "infogaze/common.hpp"

namespace infogaze {

// f(x, grad) evaluates the objective and, when grad != nullptr, writes the
// gradient into *grad (resized by the callee).
using ObjectiveFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct OptimOptions {
  int max_iter = 500;
  double rel_tol = 1e-7;   // stop when relative objective improvement drops below
  double grad_tol = 1e-9;  // or when the gradient inf-norm drops below
  int history = 10;        // L-BFGS memory
  int max_line_steps = 40;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Limited-memory BFGS with backtracking Armijo line search. Minimizes f.
// Deterministic: identical inputs give identical iterates. Throws
// Error(non_finite_objective) if the objective or gradient is non-finite at
// the start point.
OptimResult minimize_lbfgs(const ObjectiveFn& f, Eigen::VectorXd x0,
                           const OptimOptions& opts = {});

}  // namespace infogaze
