#pragma once

#include <vector>

#include "otkit/core.hpp"

namespace otkit {

// Value and maximizer of a conjugate-type expression. For delta_omega the
// gradient is the maximizer over the nonnegative orthant; for max_omega it
// lies on the probability simplex. clamp_events counts exp-argument clamps
// (entropy kind only).
struct ConjugateValueGrad {
  double value = 0.0;
  std::vector<double> grad;
  int clamp_events = 0;
};

// Euclidean projection of x onto {y >= 0, sum(y) = radius}, computed with the
// O(m log m) sort-and-threshold rule.
std::vector<double> project_simplex(const std::vector<double>& x, double radius);

// The threshold tau and support size rho of the simplex projection:
// y = [x - tau]_+ with tau = (sum of the rho largest entries - radius) / rho.
struct SimplexThreshold {
  double tau = 0.0;
  int rho = 0;
};
SimplexThreshold simplex_projection_threshold(const std::vector<double>& x, double radius);

// Conjugate of Omega restricted to the nonnegative orthant:
//   delta_omega(x) = sup_{y >= 0} y^t x - Omega(y).
// Closed forms for entropy / squared_l2 / group_lasso_l2; group_lasso_entropy
// runs an inner proximal-gradient solve (tolerance 1e-10 on the inner
// gradient infinity-norm, at most 10000 iterations, backtracking by halving
// from initial step gamma). `warm_start` seeds that inner solve.
ConjugateValueGrad delta_omega(const std::vector<double>& x, const RegParams& reg,
                               const std::vector<double>* warm_start = nullptr);

// Conjugate of Omega_j(y) = Omega(b_j y) / b_j restricted to the simplex, the
// smoothed max operator of the semi-dual. Only entropy and squared_l2 have
// closed forms; group-lasso kinds are rejected.
ConjugateValueGrad max_omega(const std::vector<double>& x, const RegParams& reg, double bj);

// Omega applied to one column vector (0 log 0 := 0 for entropy kinds).
double omega_of_column(const std::vector<double>& y, const RegParams& reg);

// sum_j Omega(column j of T).
double omega_value(const Matrix& T, const RegParams& reg);
double omega_value(const TransportPlan& T, const RegParams& reg);

}  // namespace otkit
