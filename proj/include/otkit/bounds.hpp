#pragma once

#include "otkit/core.hpp"

namespace otkit {

// Closed-form approximation-error constants. L/U bound the regularized-primal
// gap (gamma*L <= OT_reg - OT <= gamma*U); L_relaxed / L_semi_relaxed bound
// the relaxed-primal gaps (0 <= OT - value <= gamma*L_*), with nu1/nu2 the
// intermediate dual-norm constants.
struct BoundReport {
  double L = 0.0;
  double U = 0.0;
  double L_relaxed = 0.0;
  double L_semi_relaxed = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
};

struct RegularizationGapBounds {
  double L = 0.0;
  double U = 0.0;
};

// entropy:    L = -H(a) - H(b),                    U = -max{H(a), H(b)}
// squared_l2: L = 1/2 sum_ij (a_i/n + b_j/m - 1/(mn))^2,
//             U = 1/2 min{||a||^2, ||b||^2}
RegularizationGapBounds regularization_gap_bounds(const Histogram& a, const Histogram& b, RegKind kind);

struct RelaxationGapBounds {
  double L = 0.0;
  double L_tilde = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
};

// nu1 = max{(2+n/m)||a^-1||_inf, ||b^-1||_inf},
// nu2 = max{||a^-1||_inf, (2+m/n)||b^-1||_inf},
// L = ||C||_inf^2 min{nu1+n, nu2+m}^2,  L~ = 2 ||C||_inf^2 ||a^-1||_inf^2.
RelaxationGapBounds relaxation_gap_bounds(const Histogram& a, const Histogram& b, const CostMatrix& C);

// Both bound families in one report; `kind` must be entropy or squared_l2.
BoundReport bound_report(const Histogram& a, const Histogram& b, const CostMatrix& C,
                         RegKind kind);

// True iff gamma*lower - s <= measured - exact <= gamma*upper + s with
// additive slack s = 10 * grad_tol * (1 + |exact|).
bool verify_sandwich(double measured, double exact, double lower, double upper, double gamma,
                     double grad_tol);

// Shannon entropy -sum p log p.
double entropy_of(const Histogram& h);

}  // namespace otkit
