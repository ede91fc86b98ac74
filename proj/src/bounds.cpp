#include "otkit/bounds.hpp"

#include <cmath>

namespace otkit {

namespace {

double squared_norm(const Histogram& h) {
  double s = 0.0;
  for (double w : h.weights()) s += w * w;
  return s;
}

double inv_linf(const Histogram& h) {
  double m = 0.0;
  for (double w : h.weights()) m = std::max(m, 1.0 / w);
  return m;
}

}  // namespace

double entropy_of(const Histogram& h) {
  double s = 0.0;
  for (double w : h.weights()) s -= w * std::log(w);
  return s;
}

RegularizationGapBounds regularization_gap_bounds(const Histogram& a, const Histogram& b, RegKind kind) {
  RegularizationGapBounds out;
  switch (kind) {
    case RegKind::entropy: {
      double ha = entropy_of(a), hb = entropy_of(b);
      out.L = -ha - hb;
      out.U = -std::max(ha, hb);
      return out;
    }
    case RegKind::squared_l2: {
      const int m = a.dim(), n = b.dim();
      double s = 0.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          double t = a[i] / n + b[j] / m - 1.0 / (static_cast<double>(m) * n);
          s += t * t;
        }
      out.L = 0.5 * s;
      out.U = 0.5 * std::min(squared_norm(a), squared_norm(b));
      return out;
    }
    default:
      throw OtError(Errc::unsupported_regularizer,
                    "approximation-error constants exist for entropy and squared_l2 only");
  }
}

RelaxationGapBounds relaxation_gap_bounds(const Histogram& a, const Histogram& b, const CostMatrix& C) {
  validate_instance(a, b, C);
  const double m = a.dim(), n = b.dim();
  const double ia = inv_linf(a), ib = inv_linf(b);
  const double cmax = C.max_abs();

  RelaxationGapBounds out;
  out.nu1 = std::max((2.0 + n / m) * ia, ib);
  out.nu2 = std::max(ia, (2.0 + m / n) * ib);
  double mn = std::min(out.nu1 + n, out.nu2 + m);
  out.L = cmax * cmax * mn * mn;
  out.L_tilde = 2.0 * cmax * cmax * ia * ia;
  return out;
}

BoundReport bound_report(const Histogram& a, const Histogram& b, const CostMatrix& C,
                         RegKind kind) {
  RegularizationGapBounds t1 = regularization_gap_bounds(a, b, kind);
  RelaxationGapBounds t2 = relaxation_gap_bounds(a, b, C);
  return BoundReport{t1.L, t1.U, t2.L, t2.L_tilde, t2.nu1, t2.nu2};
}

bool verify_sandwich(double measured, double exact, double lower, double upper, double gamma,
                     double grad_tol) {
  double slack = 10.0 * grad_tol * (1.0 + std::fabs(exact));
  double diff = measured - exact;
  return diff >= gamma * lower - slack && diff <= gamma * upper + slack;
}

}  // namespace otkit
