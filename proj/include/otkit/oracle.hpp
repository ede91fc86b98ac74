#pragma once

#include <optional>

#include "otkit/core.hpp"

namespace otkit {

// Exact optimum of the unregularized problem with a certifying dual pair:
// the plan is a vertex of U(a, b) with at most m+n-1 nonzeros and
// alpha^t a + beta^t b = <T, C> up to rounding.
struct ExactSolution {
  TransportPlan plan;
  double value = 0.0;
  DualPotentials dual;
};

// Network simplex specialized to the bipartite transportation problem:
// north-west-corner initial basis, Bland's rule for entering and leaving
// arcs (anti-cycling), duals recomputed from the basis tree each pivot.
// Desk scale only: requires m*n <= 1e6.
ExactSolution solve_exact(const Histogram& a, const Histogram& b, const CostMatrix& C);

// ||T - T*||_F / ||T*||_F.
double plan_error(const TransportPlan& T, const TransportPlan& T_star);

struct ValueErrors {
  std::optional<double> value_error;  // absent when <T*, C> = 0
  double reg_value_error = 0.0;
  double marginal_error = 0.0;
};

// Figure-of-merit errors of a candidate plan/value against the exact
// solution: |<T,C> - <T*,C>| / <T*,C>, |v_reg - <T*,C>| and
// ||T 1 - a|| + ||T^t 1 - b||.
ValueErrors value_errors(const TransportPlan& T, double v_reg, const ExactSolution& exact,
                         const Histogram& a, const Histogram& b, const CostMatrix& C);

}  // namespace otkit
