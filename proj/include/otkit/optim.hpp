#pragma once

#include <functional>
#include <vector>

#include "otkit/core.hpp"

namespace otkit {

// Minimizes f; callers maximizing concave objectives pass the negation.
// The callback fills `grad` and returns the value.
using ObjectiveFn =
    std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

struct OptimOptions {
  int max_iters = 1000;
  double grad_tol = 1e-6;  // infinity-norm of the gradient
  int memory = 10;
  bool record_trace = false;
};

struct OptimResult {
  std::vector<double> x;
  double fx = 0.0;
  std::vector<double> grad;
  int iters = 0;
  bool converged = false;
  std::vector<double> trace;  // f at x0 and after each accepted step
};

// Limited-memory BFGS with Armijo backtracking. Falls back to the steepest
// descent direction whenever the quasi-Newton direction is not a descent
// direction.
OptimResult lbfgs_minimize(const ObjectiveFn& f, std::vector<double> x0,
                           const OptimOptions& opts);

// Plain gradient descent with Armijo backtracking and an adaptively grown
// initial step.
OptimResult gradient_descent_minimize(const ObjectiveFn& f, std::vector<double> x0,
                                      const OptimOptions& opts);

}  // namespace otkit
