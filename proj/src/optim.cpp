#include "otkit/optim.hpp"

#include <cmath>
#include <deque>

namespace otkit {

namespace {

constexpr double kArmijoC1 = 1e-4;
constexpr int kMaxBacktracks = 60;

struct Pair {
  std::vector<double> s, y;
  double rho;
};

// x + t*d
void step_into(const std::vector<double>& x, double t, const std::vector<double>& d,
               std::vector<double>& out) {
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] + t * d[i];
}

// Two-loop recursion; H0 scaled by s^t y / y^t y of the latest pair.
void lbfgs_direction(const std::deque<Pair>& pairs, const std::vector<double>& grad,
                     std::vector<double>& dir) {
  dir.assign(grad.begin(), grad.end());
  if (pairs.empty()) {
    for (double& v : dir) v = -v;
    return;
  }
  std::vector<double> alpha(pairs.size());
  for (size_t k = pairs.size(); k-- > 0;) {
    const Pair& p = pairs[k];
    alpha[k] = p.rho * dot(p.s, dir);
    for (size_t i = 0; i < dir.size(); ++i) dir[i] -= alpha[k] * p.y[i];
  }
  const Pair& last = pairs.back();
  double scale = dot(last.s, last.y) / dot(last.y, last.y);
  for (double& v : dir) v *= scale;
  for (size_t k = 0; k < pairs.size(); ++k) {
    const Pair& p = pairs[k];
    double beta = p.rho * dot(p.y, dir);
    for (size_t i = 0; i < dir.size(); ++i) dir[i] += (alpha[k] - beta) * p.s[i];
  }
  for (double& v : dir) v = -v;
}

}  // namespace

OptimResult lbfgs_minimize(const ObjectiveFn& f, std::vector<double> x0,
                           const OptimOptions& opts) {
  OptimResult res;
  res.x = std::move(x0);
  res.grad.resize(res.x.size());
  res.fx = f(res.x, res.grad);
  if (opts.record_trace) res.trace.push_back(res.fx);

  std::deque<Pair> pairs;
  std::vector<double> dir(res.x.size()), trial(res.x.size()), trial_grad(res.x.size());

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    if (linf_norm(res.grad) <= opts.grad_tol) {
      res.converged = true;
      return res;
    }

    lbfgs_direction(pairs, res.grad, dir);
    double slope = dot(res.grad, dir);
    if (!(slope < 0.0)) {
      // Not a descent direction; discard curvature history and restart.
      pairs.clear();
      for (size_t i = 0; i < dir.size(); ++i) dir[i] = -res.grad[i];
      slope = dot(res.grad, dir);
    }

    double t = pairs.empty() ? std::min(1.0, 1.0 / std::max(1.0, linf_norm(res.grad))) : 1.0;
    bool accepted = false;
    double trial_fx = res.fx;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      step_into(res.x, t, dir, trial);
      trial_fx = f(trial, trial_grad);
      if (std::isfinite(trial_fx) && trial_fx <= res.fx + kArmijoC1 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return res;  // no float-representable progress left

    Pair p;
    p.s.resize(res.x.size());
    p.y.resize(res.x.size());
    for (size_t i = 0; i < res.x.size(); ++i) {
      p.s[i] = trial[i] - res.x[i];
      p.y[i] = trial_grad[i] - res.grad[i];
    }
    double sy = dot(p.s, p.y);
    if (sy > 1e-12 * l2_norm(p.s) * l2_norm(p.y)) {
      p.rho = 1.0 / sy;
      pairs.push_back(std::move(p));
      if (static_cast<int>(pairs.size()) > opts.memory) pairs.pop_front();
    }

    res.x.swap(trial);
    res.grad.swap(trial_grad);
    res.fx = trial_fx;
    res.iters = iter + 1;
    if (opts.record_trace) res.trace.push_back(res.fx);
  }
  res.converged = linf_norm(res.grad) <= opts.grad_tol;
  return res;
}

OptimResult gradient_descent_minimize(const ObjectiveFn& f, std::vector<double> x0,
                                      const OptimOptions& opts) {
  OptimResult res;
  res.x = std::move(x0);
  res.grad.resize(res.x.size());
  res.fx = f(res.x, res.grad);
  if (opts.record_trace) res.trace.push_back(res.fx);

  std::vector<double> dir(res.x.size()), trial(res.x.size()), trial_grad(res.x.size());
  double t_prev = 1.0;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    if (linf_norm(res.grad) <= opts.grad_tol) {
      res.converged = true;
      return res;
    }
    for (size_t i = 0; i < dir.size(); ++i) dir[i] = -res.grad[i];
    double slope = dot(res.grad, dir);

    double t = 2.0 * t_prev;
    bool accepted = false;
    double trial_fx = res.fx;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      step_into(res.x, t, dir, trial);
      trial_fx = f(trial, trial_grad);
      if (std::isfinite(trial_fx) && trial_fx <= res.fx + kArmijoC1 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return res;
    t_prev = t;

    res.x.swap(trial);
    res.grad.swap(trial_grad);
    res.fx = trial_fx;
    res.iters = iter + 1;
    if (opts.record_trace) res.trace.push_back(res.fx);
  }
  res.converged = linf_norm(res.grad) <= opts.grad_tol;
  return res;
}

}  // namespace otkit
