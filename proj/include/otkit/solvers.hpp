#pragma once

#include <optional>
#include <vector>

#include "otkit/core.hpp"
#include "otkit/regularizers.hpp"

namespace otkit {

enum class Solver {
  auto_select,  // quasi_newton for duals, accelerated_projected_gradient for primals
  quasi_newton,
  gradient_descent,
  alternating,
  accelerated_projected_gradient,
};

const char* solver_name(Solver s);

enum class Formulation { dual, semidual, relaxed, semirelaxed };

const char* formulation_name(Formulation f);

struct SolveOptions {
  int max_iters = 1000;
  double grad_tol = 1e-6;  // infinity-norm of gradient / projected-gradient residual
  Solver solver = Solver::auto_select;
  bool record_trace = false;
};

struct SolveReport {
  std::vector<double> objective_trace;
  int iters = 0;
  std::optional<double> duality_gap;
  bool gap_from_rounded_plan = false;  // gap measured against a column-projected feasible plan
  double plan_sparsity = 0.0;
  double wall_time = 0.0;  // seconds
  long clamp_events = 0;
  bool converged = true;  // false means max_iters was exhausted (soft failure)
  double final_objective = 0.0;
};

// Scale of the quadratic relaxation Phi(x, y) = ||x - y||^2 / (2 gamma).
struct RelaxationParams {
  double gamma = 1.0;
};

// --- objective/gradient assembly ------------------------------------------

struct DualObjective {
  double value = 0.0;
  std::vector<double> grad_alpha;
  std::vector<double> grad_beta;
  long clamp_events = 0;
};

// Smoothed dual: alpha^t a + beta^t b - sum_j delta_omega(alpha + beta_j 1 - c_j).
DualObjective dual_objective_grad(const std::vector<double>& alpha,
                                  const std::vector<double>& beta, const Histogram& a,
                                  const Histogram& b, const CostMatrix& C,
                                  const RegParams& reg);

struct SemiDualObjective {
  double value = 0.0;
  std::vector<double> grad;
};

// Smoothed semi-dual: alpha^t a - sum_j b_j max_omega_j(alpha - c_j).
SemiDualObjective semi_dual_objective_grad(const std::vector<double>& alpha,
                                           const Histogram& a, const Histogram& b,
                                           const CostMatrix& C, const RegParams& reg);

// Column j of the plan is grad delta_omega(alpha + beta_j 1 - c_j).
TransportPlan recover_plan_from_dual(const std::vector<double>& alpha,
                                     const std::vector<double>& beta, const Histogram& a,
                                     const Histogram& b, const CostMatrix& C,
                                     const RegParams& reg);

// Column j of the plan is b_j grad max_omega_j(alpha - c_j); column sums are
// exact by construction.
TransportPlan recover_plan_from_semidual(const std::vector<double>& alpha, const Histogram& a,
                                         const Histogram& b, const CostMatrix& C,
                                         const RegParams& reg);

// Exact block-optimal beta given alpha (the smoothed analog of the
// c-transform); entropy and squared_l2 only.
std::vector<double> smoothed_c_transform(const std::vector<double>& alpha, const Histogram& b,
                                         const CostMatrix& C, const RegParams& reg);

// --- relaxed primal objectives ---------------------------------------------

struct PrimalObjective {
  double value = 0.0;
  Matrix grad;
};

// <T,C> + ||T 1 - a||^2 / (4 gamma) + ||T^t 1 - b||^2 / (4 gamma); both
// penalties carry the 1/2 factor in front of Phi.
PrimalObjective relaxed_primal_objective_grad(const Matrix& T, const Histogram& a,
                                              const Histogram& b, const CostMatrix& C,
                                              const RelaxationParams& rel);

// <T,C> + ||T 1 - a||^2 / (2 gamma), minimized subject to T >= 0, T^t 1 = b.
PrimalObjective semi_relaxed_primal_objective_grad(const Matrix& T, const Histogram& a,
                                                   const CostMatrix& C,
                                                   const RelaxationParams& rel);

// --- solvers ----------------------------------------------------------------

struct DualSolution {
  DualPotentials potentials;
  TransportPlan plan;
  SolveReport report;
};

struct PrimalSolution {
  TransportPlan plan;
  SolveReport report;
};

// Maximizes the smoothed dual from (0, 0); quasi_newton (default),
// gradient_descent, or alternating.
DualSolution solve_dual(const Histogram& a, const Histogram& b, const CostMatrix& C,
                        const RegParams& reg, const SolveOptions& opts = {});

// Maximizes the smoothed semi-dual from 0; entropy and squared_l2 only.
DualSolution solve_semidual(const Histogram& a, const Histogram& b, const CostMatrix& C,
                            const RegParams& reg, const SolveOptions& opts = {});

// Exact block updates on (alpha, beta); for entropy these are the Sinkhorn
// iterates, for squared_l2 each block solves a simplex-projection problem.
// Stops when the sweep's infinity-norm change of (alpha, beta) <= grad_tol.
DualSolution alternating_minimization(const Histogram& a, const Histogram& b,
                                      const CostMatrix& C, const RegParams& reg,
                                      const SolveOptions& opts = {});

// Minimizes the relaxed primal over T >= 0 by accelerated projected gradient
// (projection clamps at zero), starting from a b^t.
PrimalSolution solve_relaxed_primal(const Histogram& a, const Histogram& b,
                                    const CostMatrix& C, const RelaxationParams& rel,
                                    const SolveOptions& opts = {});

// Minimizes the semi-relaxed primal over {T >= 0, T^t 1 = b} by accelerated
// proximal gradient with column-wise scaled-simplex projections; every
// iterate has exact column sums.
PrimalSolution solve_semi_relaxed_primal(const Histogram& a, const Histogram& b,
                                         const CostMatrix& C, const RelaxationParams& rel,
                                         const SolveOptions& opts = {});

// Column-wise Euclidean projection onto {t_j >= 0, sum_i t_ij = b_j}; used by
// the semi-relaxed solver and by duality-gap rounding.
Matrix project_columns_to_marginals(const Matrix& T, const Histogram& b);

// Column fan-out width: OTKIT_THREADS if set, otherwise 1. Results are
// independent of this value (fixed-topology block reduction).
int worker_threads();

}  // namespace otkit
