#include "otkit/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "otkit/optim.hpp"

namespace otkit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Columns are processed in fixed blocks and the block partials are combined
// in block order, so results are bit-identical for any worker count.
constexpr int kColumnBlock = 64;

template <typename Fn>
void run_blocks(int nblocks, const Fn& fn) {
  int threads = std::min(worker_threads(), nblocks);
  if (threads <= 1) {
    for (int blk = 0; blk < nblocks; ++blk) fn(blk);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (int blk = next.fetch_add(1); blk < nblocks; blk = next.fetch_add(1)) fn(blk);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

int block_count(int n) { return (n + kColumnBlock - 1) / kColumnBlock; }

void check_potentials(const std::vector<double>& alpha, const std::vector<double>& beta,
                      const CostMatrix& C) {
  if (static_cast<int>(alpha.size()) != C.rows() || static_cast<int>(beta.size()) != C.cols())
    throw OtError(Errc::dimension_mismatch, "potential lengths do not match cost shape");
}

void require_closed_form_semidual(const RegParams& reg) {
  if (reg.is_group_kind())
    throw OtError(Errc::unsupported_regularizer,
                  "semi-dual path requires entropy or squared_l2 regularization");
}

Matrix outer_product(const Histogram& a, const Histogram& b) {
  Matrix T(a.dim(), b.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < b.dim(); ++j) T(i, j) = a[i] * b[j];
  return T;
}

// Duality gap against the column-rounded feasible plan (one pass of scaled
// simplex projections, no row correction).
void attach_duality_gap(SolveReport& report, const TransportPlan& plan, const Histogram& b,
                        const CostMatrix& C, const RegParams& reg, double dual_value) {
  Matrix rounded = project_columns_to_marginals(plan.entries, b);
  double primal = primal_value(rounded, C) + omega_value(rounded, reg);
  report.duality_gap = primal - dual_value;
  report.gap_from_rounded_plan = true;
}

}  // namespace

const char* solver_name(Solver s) {
  switch (s) {
    case Solver::auto_select: return "auto";
    case Solver::quasi_newton: return "quasi_newton";
    case Solver::gradient_descent: return "gradient_descent";
    case Solver::alternating: return "alternating";
    case Solver::accelerated_projected_gradient: return "accelerated_projected_gradient";
  }
  return "unknown";
}

const char* formulation_name(Formulation f) {
  switch (f) {
    case Formulation::dual: return "dual";
    case Formulation::semidual: return "semidual";
    case Formulation::relaxed: return "relaxed";
    case Formulation::semirelaxed: return "semirelaxed";
  }
  return "unknown";
}

int worker_threads() {
  const char* env = std::getenv("OTKIT_THREADS");
  if (!env) return 1;
  int v = std::atoi(env);
  return v < 1 ? 1 : v;
}

DualObjective dual_objective_grad(const std::vector<double>& alpha,
                                  const std::vector<double>& beta, const Histogram& a,
                                  const Histogram& b, const CostMatrix& C,
                                  const RegParams& reg) {
  check_potentials(alpha, beta, C);
  validate_instance(a, b, C);
  reg.validate(C.rows());
  const int m = C.rows(), n = C.cols();

  struct Partial {
    double value = 0.0;
    std::vector<double> grad_alpha;
    long clamps = 0;
  };
  const int nblocks = block_count(n);
  std::vector<Partial> partials(static_cast<size_t>(nblocks));
  std::vector<double> grad_beta(static_cast<size_t>(n));

  run_blocks(nblocks, [&](int blk) {
    Partial& p = partials[static_cast<size_t>(blk)];
    p.grad_alpha.assign(static_cast<size_t>(m), 0.0);
    std::vector<double> x(static_cast<size_t>(m));
    std::vector<double> warm;
    const std::vector<double>* warm_ptr = nullptr;
    const int jend = std::min(n, (blk + 1) * kColumnBlock);
    for (int j = blk * kColumnBlock; j < jend; ++j) {
      for (int i = 0; i < m; ++i)
        x[static_cast<size_t>(i)] = alpha[static_cast<size_t>(i)] + beta[static_cast<size_t>(j)] - C(i, j);
      ConjugateValueGrad cg = delta_omega(x, reg, warm_ptr);
      p.value += cg.value;
      p.clamps += cg.clamp_events;
      double colsum = 0.0;
      for (int i = 0; i < m; ++i) {
        p.grad_alpha[static_cast<size_t>(i)] += cg.grad[static_cast<size_t>(i)];
        colsum += cg.grad[static_cast<size_t>(i)];
      }
      grad_beta[static_cast<size_t>(j)] = b[j] - colsum;
      if (reg.kind == RegKind::group_lasso_entropy) {
        warm = std::move(cg.grad);
        warm_ptr = &warm;
      }
    }
  });

  DualObjective out;
  out.grad_alpha = a.weights();
  double delta_sum = 0.0;
  for (const Partial& p : partials) {
    delta_sum += p.value;
    out.clamp_events += p.clamps;
    for (int i = 0; i < m; ++i) out.grad_alpha[static_cast<size_t>(i)] -= p.grad_alpha[static_cast<size_t>(i)];
  }
  out.value = dot(alpha, a.weights()) + dot(beta, b.weights()) - delta_sum;
  out.grad_beta = std::move(grad_beta);
  return out;
}

SemiDualObjective semi_dual_objective_grad(const std::vector<double>& alpha,
                                           const Histogram& a, const Histogram& b,
                                           const CostMatrix& C, const RegParams& reg) {
  validate_instance(a, b, C);
  if (static_cast<int>(alpha.size()) != a.dim())
    throw OtError(Errc::dimension_mismatch, "alpha length does not match a");
  require_closed_form_semidual(reg);
  reg.validate(C.rows());
  const int m = C.rows(), n = C.cols();

  struct Partial {
    double value = 0.0;
    std::vector<double> grad;
  };
  const int nblocks = block_count(n);
  std::vector<Partial> partials(static_cast<size_t>(nblocks));

  run_blocks(nblocks, [&](int blk) {
    Partial& p = partials[static_cast<size_t>(blk)];
    p.grad.assign(static_cast<size_t>(m), 0.0);
    std::vector<double> x(static_cast<size_t>(m));
    const int jend = std::min(n, (blk + 1) * kColumnBlock);
    for (int j = blk * kColumnBlock; j < jend; ++j) {
      for (int i = 0; i < m; ++i)
        x[static_cast<size_t>(i)] = alpha[static_cast<size_t>(i)] - C(i, j);
      ConjugateValueGrad mo = max_omega(x, reg, b[j]);
      p.value += b[j] * mo.value;
      for (int i = 0; i < m; ++i)
        p.grad[static_cast<size_t>(i)] += b[j] * mo.grad[static_cast<size_t>(i)];
    }
  });

  SemiDualObjective out;
  out.grad = a.weights();
  double conj_sum = 0.0;
  for (const Partial& p : partials) {
    conj_sum += p.value;
    for (int i = 0; i < m; ++i) out.grad[static_cast<size_t>(i)] -= p.grad[static_cast<size_t>(i)];
  }
  out.value = dot(alpha, a.weights()) - conj_sum;
  return out;
}

TransportPlan recover_plan_from_dual(const std::vector<double>& alpha,
                                     const std::vector<double>& beta, const Histogram& a,
                                     const Histogram& b, const CostMatrix& C,
                                     const RegParams& reg) {
  check_potentials(alpha, beta, C);
  reg.validate(C.rows());
  const int m = C.rows(), n = C.cols();
  Matrix T(m, n);
  run_blocks(block_count(n), [&](int blk) {
    std::vector<double> x(static_cast<size_t>(m));
    std::vector<double> warm;
    const std::vector<double>* warm_ptr = nullptr;
    const int jend = std::min(n, (blk + 1) * kColumnBlock);
    for (int j = blk * kColumnBlock; j < jend; ++j) {
      for (int i = 0; i < m; ++i)
        x[static_cast<size_t>(i)] = alpha[static_cast<size_t>(i)] + beta[static_cast<size_t>(j)] - C(i, j);
      ConjugateValueGrad cg = delta_omega(x, reg, warm_ptr);
      for (int i = 0; i < m; ++i) T(i, j) = cg.grad[static_cast<size_t>(i)];
      if (reg.kind == RegKind::group_lasso_entropy) {
        warm = std::move(cg.grad);
        warm_ptr = &warm;
      }
    }
  });
  return TransportPlan::make(std::move(T), a, b);
}

TransportPlan recover_plan_from_semidual(const std::vector<double>& alpha, const Histogram& a,
                                         const Histogram& b, const CostMatrix& C,
                                         const RegParams& reg) {
  require_closed_form_semidual(reg);
  if (static_cast<int>(alpha.size()) != C.rows())
    throw OtError(Errc::dimension_mismatch, "alpha length does not match cost rows");
  const int m = C.rows(), n = C.cols();
  Matrix T(m, n);
  run_blocks(block_count(n), [&](int blk) {
    std::vector<double> x(static_cast<size_t>(m));
    const int jend = std::min(n, (blk + 1) * kColumnBlock);
    for (int j = blk * kColumnBlock; j < jend; ++j) {
      for (int i = 0; i < m; ++i)
        x[static_cast<size_t>(i)] = alpha[static_cast<size_t>(i)] - C(i, j);
      ConjugateValueGrad mo = max_omega(x, reg, b[j]);
      for (int i = 0; i < m; ++i) T(i, j) = b[j] * mo.grad[static_cast<size_t>(i)];
    }
  });
  return TransportPlan::make(std::move(T), a, b);
}

std::vector<double> smoothed_c_transform(const std::vector<double>& alpha, const Histogram& b,
                                         const CostMatrix& C, const RegParams& reg) {
  require_closed_form_semidual(reg);
  if (static_cast<int>(alpha.size()) != C.rows())
    throw OtError(Errc::dimension_mismatch, "alpha length does not match cost rows");
  const int m = C.rows(), n = C.cols();
  std::vector<double> beta(static_cast<size_t>(n));
  std::vector<double> w(static_cast<size_t>(m));
  for (int j = 0; j < n; ++j) {
    if (reg.kind == RegKind::entropy) {
      // beta_j = gamma log( b_j / sum_i exp((alpha_i - C_ij)/gamma - 1) )
      for (int i = 0; i < m; ++i)
        w[static_cast<size_t>(i)] = (alpha[static_cast<size_t>(i)] - C(i, j)) / reg.gamma - 1.0;
      double mx = *std::max_element(w.begin(), w.end());
      double s = 0.0;
      for (double v : w) s += std::exp(v - mx);
      beta[static_cast<size_t>(j)] = reg.gamma * (std::log(b[j]) - mx - std::log(s));
    } else {
      for (int i = 0; i < m; ++i)
        w[static_cast<size_t>(i)] = (alpha[static_cast<size_t>(i)] - C(i, j)) / (reg.gamma * b[j]);
      beta[static_cast<size_t>(j)] = -reg.gamma * b[j] * simplex_projection_threshold(w, 1.0).tau;
    }
  }
  return beta;
}

Matrix project_columns_to_marginals(const Matrix& T, const Histogram& b) {
  if (T.cols() != b.dim())
    throw OtError(Errc::dimension_mismatch, "column count does not match b");
  Matrix out(T.rows(), T.cols());
  std::vector<double> col(static_cast<size_t>(T.rows()));
  for (int j = 0; j < T.cols(); ++j) {
    for (int i = 0; i < T.rows(); ++i) col[static_cast<size_t>(i)] = T(i, j);
    std::vector<double> proj = project_simplex(col, b[j]);
    for (int i = 0; i < T.rows(); ++i) out(i, j) = proj[static_cast<size_t>(i)];
  }
  return out;
}

DualSolution solve_dual(const Histogram& a, const Histogram& b, const CostMatrix& C,
                        const RegParams& reg, const SolveOptions& opts) {
  validate_instance(a, b, C);
  reg.validate(a.dim());
  Solver which = opts.solver == Solver::auto_select ? Solver::quasi_newton : opts.solver;
  if (which == Solver::alternating) return alternating_minimization(a, b, C, reg, opts);
  if (which != Solver::quasi_newton && which != Solver::gradient_descent)
    throw OtError(Errc::invalid_argument,
                  std::string(solver_name(which)) + " does not apply to the dual formulation");

  const auto t0 = Clock::now();
  const int m = a.dim(), n = b.dim();
  long clamp_total = 0;
  ObjectiveFn negated = [&](const std::vector<double>& z, std::vector<double>& g) {
    std::vector<double> alpha(z.begin(), z.begin() + m);
    std::vector<double> beta(z.begin() + m, z.end());
    DualObjective d = dual_objective_grad(alpha, beta, a, b, C, reg);
    clamp_total += d.clamp_events;
    g.resize(static_cast<size_t>(m + n));
    for (int i = 0; i < m; ++i) g[static_cast<size_t>(i)] = -d.grad_alpha[static_cast<size_t>(i)];
    for (int j = 0; j < n; ++j) g[static_cast<size_t>(m + j)] = -d.grad_beta[static_cast<size_t>(j)];
    return -d.value;
  };

  OptimOptions oo;
  oo.max_iters = opts.max_iters;
  oo.grad_tol = opts.grad_tol;
  oo.record_trace = opts.record_trace;
  std::vector<double> z0(static_cast<size_t>(m + n), 0.0);
  OptimResult r = which == Solver::quasi_newton ? lbfgs_minimize(negated, std::move(z0), oo)
                                                : gradient_descent_minimize(negated, std::move(z0), oo);

  DualSolution sol;
  sol.potentials.alpha.assign(r.x.begin(), r.x.begin() + m);
  sol.potentials.beta = std::vector<double>(r.x.begin() + m, r.x.end());
  sol.plan = recover_plan_from_dual(sol.potentials.alpha, *sol.potentials.beta, a, b, C, reg);
  sol.report.iters = r.iters;
  sol.report.converged = r.converged;
  sol.report.final_objective = -r.fx;
  sol.report.clamp_events = clamp_total;
  sol.report.plan_sparsity = sol.plan.sparsity();
  for (double v : r.trace) sol.report.objective_trace.push_back(-v);
  attach_duality_gap(sol.report, sol.plan, b, C, reg, -r.fx);
  sol.report.wall_time = seconds_since(t0);
  return sol;
}

DualSolution solve_semidual(const Histogram& a, const Histogram& b, const CostMatrix& C,
                            const RegParams& reg, const SolveOptions& opts) {
  validate_instance(a, b, C);
  reg.validate(a.dim());
  require_closed_form_semidual(reg);
  Solver which = opts.solver == Solver::auto_select ? Solver::quasi_newton : opts.solver;
  if (which != Solver::quasi_newton && which != Solver::gradient_descent)
    throw OtError(Errc::invalid_argument,
                  std::string(solver_name(which)) + " does not apply to the semi-dual formulation");

  const auto t0 = Clock::now();
  const int m = a.dim();
  ObjectiveFn negated = [&](const std::vector<double>& z, std::vector<double>& g) {
    SemiDualObjective d = semi_dual_objective_grad(z, a, b, C, reg);
    g.resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) g[static_cast<size_t>(i)] = -d.grad[static_cast<size_t>(i)];
    return -d.value;
  };

  OptimOptions oo;
  oo.max_iters = opts.max_iters;
  oo.grad_tol = opts.grad_tol;
  oo.record_trace = opts.record_trace;
  std::vector<double> z0(static_cast<size_t>(m), 0.0);
  OptimResult r = which == Solver::quasi_newton ? lbfgs_minimize(negated, std::move(z0), oo)
                                                : gradient_descent_minimize(negated, std::move(z0), oo);

  DualSolution sol;
  sol.potentials.alpha = r.x;
  sol.potentials.beta = smoothed_c_transform(r.x, b, C, reg);
  sol.plan = recover_plan_from_semidual(sol.potentials.alpha, a, b, C, reg);
  sol.report.iters = r.iters;
  sol.report.converged = r.converged;
  sol.report.final_objective = -r.fx;
  sol.report.plan_sparsity = sol.plan.sparsity();
  for (double v : r.trace) sol.report.objective_trace.push_back(-v);
  attach_duality_gap(sol.report, sol.plan, b, C, reg, -r.fx);
  sol.report.wall_time = seconds_since(t0);
  return sol;
}

DualSolution alternating_minimization(const Histogram& a, const Histogram& b,
                                      const CostMatrix& C, const RegParams& reg,
                                      const SolveOptions& opts) {
  validate_instance(a, b, C);
  reg.validate(a.dim());
  if (reg.kind != RegKind::entropy && reg.kind != RegKind::squared_l2)
    throw OtError(Errc::unsupported_regularizer,
                  "alternating minimization requires entropy or squared_l2");

  const auto t0 = Clock::now();
  const int m = a.dim(), n = b.dim();
  const double gamma = reg.gamma;
  std::vector<double> alpha(static_cast<size_t>(m), 0.0), beta(static_cast<size_t>(n), 0.0);

  Matrix K;  // Gibbs kernel, entropy only
  if (reg.kind == RegKind::entropy) {
    K = Matrix(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) K(i, j) = std::exp(-C(i, j) / gamma);
  }

  DualSolution sol;
  bool converged = false;
  int sweeps = 0;
  std::vector<double> alpha_old, beta_old, x;
  for (int it = 0; it < opts.max_iters; ++it) {
    alpha_old = alpha;
    beta_old = beta;
    if (reg.kind == RegKind::entropy) {
      std::vector<double> ev(static_cast<size_t>(n));
      for (int j = 0; j < n; ++j) ev[static_cast<size_t>(j)] = std::exp(beta[static_cast<size_t>(j)] / gamma);
      for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += K(i, j) * ev[static_cast<size_t>(j)];
        alpha[static_cast<size_t>(i)] = gamma * (1.0 + std::log(a[i]) - std::log(s));
      }
      std::vector<double> eu(static_cast<size_t>(m));
      for (int i = 0; i < m; ++i) eu[static_cast<size_t>(i)] = std::exp(alpha[static_cast<size_t>(i)] / gamma - 1.0);
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += K(i, j) * eu[static_cast<size_t>(i)];
        beta[static_cast<size_t>(j)] = gamma * (std::log(b[j]) - std::log(s));
      }
    } else {
      // Each block update is the simplex-projection threshold in disguise.
      x.resize(static_cast<size_t>(n));
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j)
          x[static_cast<size_t>(j)] = (beta[static_cast<size_t>(j)] - C(i, j)) / (gamma * a[i]);
        alpha[static_cast<size_t>(i)] = -gamma * a[i] * simplex_projection_threshold(x, 1.0).tau;
      }
      x.resize(static_cast<size_t>(m));
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < m; ++i)
          x[static_cast<size_t>(i)] = (alpha[static_cast<size_t>(i)] - C(i, j)) / (gamma * b[j]);
        beta[static_cast<size_t>(j)] = -gamma * b[j] * simplex_projection_threshold(x, 1.0).tau;
      }
    }
    ++sweeps;
    if (opts.record_trace)
      sol.report.objective_trace.push_back(dual_objective_grad(alpha, beta, a, b, C, reg).value);
    double change = std::max(linf_diff(alpha, alpha_old), linf_diff(beta, beta_old));
    if (change <= opts.grad_tol) {
      converged = true;
      break;
    }
  }

  sol.potentials.alpha = alpha;
  sol.potentials.beta = beta;
  sol.plan = recover_plan_from_dual(alpha, beta, a, b, C, reg);
  DualObjective final_obj = dual_objective_grad(alpha, beta, a, b, C, reg);
  sol.report.iters = sweeps;
  sol.report.converged = converged;
  sol.report.final_objective = final_obj.value;
  sol.report.clamp_events = final_obj.clamp_events;
  sol.report.plan_sparsity = sol.plan.sparsity();
  attach_duality_gap(sol.report, sol.plan, b, C, reg, final_obj.value);
  sol.report.wall_time = seconds_since(t0);
  return sol;
}

PrimalObjective relaxed_primal_objective_grad(const Matrix& T, const Histogram& a,
                                              const Histogram& b, const CostMatrix& C,
                                              const RelaxationParams& rel) {
  if (!T.same_shape(C.entries()))
    throw OtError(Errc::dimension_mismatch, "plan and cost shapes differ");
  if (!(rel.gamma > 0.0)) throw OtError(Errc::invalid_argument, "relaxation gamma must be positive");
  const int m = T.rows(), n = T.cols();
  std::vector<double> r = T.row_sums(), c = T.col_sums();
  for (int i = 0; i < m; ++i) r[static_cast<size_t>(i)] -= a[i];
  for (int j = 0; j < n; ++j) c[static_cast<size_t>(j)] -= b[j];

  PrimalObjective out;
  double rr = 0.0, cc = 0.0;
  for (double v : r) rr += v * v;
  for (double v : c) cc += v * v;
  out.value = primal_value(T, C) + (rr + cc) / (4.0 * rel.gamma);
  out.grad = Matrix(m, n);
  const double half_inv = 1.0 / (2.0 * rel.gamma);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out.grad(i, j) = C(i, j) + half_inv * (r[static_cast<size_t>(i)] + c[static_cast<size_t>(j)]);
  return out;
}

PrimalObjective semi_relaxed_primal_objective_grad(const Matrix& T, const Histogram& a,
                                                   const CostMatrix& C,
                                                   const RelaxationParams& rel) {
  if (!T.same_shape(C.entries()))
    throw OtError(Errc::dimension_mismatch, "plan and cost shapes differ");
  if (!(rel.gamma > 0.0)) throw OtError(Errc::invalid_argument, "relaxation gamma must be positive");
  const int m = T.rows(), n = T.cols();
  std::vector<double> r = T.row_sums();
  for (int i = 0; i < m; ++i) r[static_cast<size_t>(i)] -= a[i];

  PrimalObjective out;
  double rr = 0.0;
  for (double v : r) rr += v * v;
  out.value = primal_value(T, C) + rr / (2.0 * rel.gamma);
  out.grad = Matrix(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.grad(i, j) = C(i, j) + r[static_cast<size_t>(i)] / rel.gamma;
  return out;
}

namespace {

// FISTA-type loop shared by the two relaxed primals. `accelerate == false`
// gives plain projected gradient. Convergence is declared on the unit-step
// fixed-point residual ||T - P(T - grad f(T))||_inf.
template <typename Objective, typename Project>
PrimalSolution projected_descent(const Objective& objective, const Project& project, Matrix T0,
                                 double init_step, bool accelerate, const SolveOptions& opts) {
  const auto t0 = Clock::now();
  const int m = T0.rows(), n = T0.cols();
  const size_t total = T0.size();

  Matrix T = T0;
  Matrix Z = std::move(T0);
  double theta = 1.0;
  double step = init_step;

  double final_value = objective(T).value;
  double best_value = final_value;
  Matrix best = T;

  PrimalSolution sol;
  if (opts.record_trace) sol.report.objective_trace.push_back(final_value);

  bool converged = false;
  int iters = 0;
  Matrix trial(m, n), probe(m, n);
  for (int it = 0; it < opts.max_iters; ++it) {
    PrimalObjective fZ = objective(Z);

    PrimalObjective ftrial;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (size_t k = 0; k < total; ++k) trial.data()[k] = Z.data()[k] - step * fZ.grad.data()[k];
      project(trial);
      ftrial = objective(trial);
      double lin = 0.0, quad = 0.0;
      for (size_t k = 0; k < total; ++k) {
        double d = trial.data()[k] - Z.data()[k];
        lin += fZ.grad.data()[k] * d;
        quad += d * d;
      }
      if (ftrial.value <= fZ.value + lin + quad / (2.0 * step)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    ++iters;

    if (opts.record_trace) sol.report.objective_trace.push_back(ftrial.value);
    if (ftrial.value < best_value) {
      best_value = ftrial.value;
      best = trial;
    }

    // Fixed-point residual at the new iterate.
    for (size_t k = 0; k < total; ++k) probe.data()[k] = trial.data()[k] - ftrial.grad.data()[k];
    project(probe);
    double residual = 0.0;
    for (size_t k = 0; k < total; ++k)
      residual = std::max(residual, std::fabs(trial.data()[k] - probe.data()[k]));

    if (residual <= opts.grad_tol) {
      std::swap(T, trial);
      final_value = ftrial.value;
      converged = true;
      break;
    }

    if (accelerate) {
      // Gradient-based adaptive restart keeps the momentum from stalling the
      // tail on boundary-active problems.
      double align = 0.0;
      for (size_t k = 0; k < total; ++k)
        align += fZ.grad.data()[k] * (trial.data()[k] - T.data()[k]);
      if (align > 0.0) theta = 1.0;
      double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      double momentum = (theta - 1.0) / theta_next;
      for (size_t k = 0; k < total; ++k)
        Z.data()[k] = trial.data()[k] + momentum * (trial.data()[k] - T.data()[k]);
      theta = theta_next;
    } else {
      Z = trial;
    }
    std::swap(T, trial);
    final_value = ftrial.value;
  }

  if (!converged) {
    T = std::move(best);
    final_value = best_value;
  }
  sol.report.iters = iters;
  sol.report.converged = converged;
  sol.report.final_objective = final_value;
  sol.report.wall_time = seconds_since(t0);
  sol.plan.entries = std::move(T);
  return sol;
}

Solver pick_primal_solver(const SolveOptions& opts) {
  Solver which = opts.solver == Solver::auto_select ? Solver::accelerated_projected_gradient
                                                    : opts.solver;
  if (which != Solver::accelerated_projected_gradient && which != Solver::gradient_descent)
    throw OtError(Errc::invalid_argument,
                  std::string(solver_name(which)) + " does not apply to the relaxed primals");
  return which;
}

}  // namespace

PrimalSolution solve_relaxed_primal(const Histogram& a, const Histogram& b, const CostMatrix& C,
                                    const RelaxationParams& rel, const SolveOptions& opts) {
  validate_instance(a, b, C);
  if (!(rel.gamma > 0.0)) throw OtError(Errc::invalid_argument, "relaxation gamma must be positive");
  bool accelerate = pick_primal_solver(opts) == Solver::accelerated_projected_gradient;

  auto objective = [&](const Matrix& T) { return relaxed_primal_objective_grad(T, a, b, C, rel); };
  auto clamp = [](Matrix& T) {
    for (size_t k = 0; k < T.size(); ++k) T.data()[k] = std::max(T.data()[k], 0.0);
  };
  PrimalSolution sol =
      projected_descent(objective, clamp, outer_product(a, b), rel.gamma, accelerate, opts);
  sol.plan = TransportPlan::make(std::move(sol.plan.entries), a, b);
  sol.report.plan_sparsity = sol.plan.sparsity();
  return sol;
}

PrimalSolution solve_semi_relaxed_primal(const Histogram& a, const Histogram& b,
                                         const CostMatrix& C, const RelaxationParams& rel,
                                         const SolveOptions& opts) {
  validate_instance(a, b, C);
  if (!(rel.gamma > 0.0)) throw OtError(Errc::invalid_argument, "relaxation gamma must be positive");
  bool accelerate = pick_primal_solver(opts) == Solver::accelerated_projected_gradient;

  auto objective = [&](const Matrix& T) {
    return semi_relaxed_primal_objective_grad(T, a, C, rel);
  };
  auto project = [&](Matrix& T) { T = project_columns_to_marginals(T, b); };
  PrimalSolution sol =
      projected_descent(objective, project, outer_product(a, b), rel.gamma, accelerate, opts);
  sol.plan = TransportPlan::make(std::move(sol.plan.entries), a, b);
  sol.report.plan_sparsity = sol.plan.sparsity();
  return sol;
}

}  // namespace otkit
