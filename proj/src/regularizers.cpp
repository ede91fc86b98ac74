#include "otkit/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace otkit {

namespace {

// Exponent cap for the entropy delta_omega; exp(700) is near the double
// overflow boundary and there is no log-sum-exp rescue on this path.
constexpr double kExpClamp = 700.0;

void check_finite(const std::vector<double>& x) {
  for (double v : x)
    if (!std::isfinite(v)) throw OtError(Errc::non_finite_input, "non-finite input vector");
}

double group_norm(const std::vector<double>& y, const std::vector<int>& group) {
  double s = 0.0;
  for (int i : group) s += y[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
  return std::sqrt(s);
}

// Inner objective for group_lasso_entropy:
//   f(y) = gamma * sum(y log y) + gamma * mu * sum_G ||y_G|| - x^t y,  y > 0.
// Split as smooth h(y) = gamma * sum(y log y) - x^t y plus the group norms,
// whose prox is block soft thresholding.
struct GlEntropyInner {
  const std::vector<double>& x;
  const RegParams& reg;

  double smooth_value(const std::vector<double>& y) const {
    double v = 0.0;
    for (size_t i = 0; i < y.size(); ++i) v += reg.gamma * y[i] * std::log(y[i]) - x[i] * y[i];
    return v;
  }
  void smooth_grad(const std::vector<double>& y, std::vector<double>& g) const {
    for (size_t i = 0; i < y.size(); ++i) g[i] = reg.gamma * (std::log(y[i]) + 1.0) - x[i];
  }
  double full_value(const std::vector<double>& y) const {
    double v = smooth_value(y);
    for (const auto& g : reg.groups) v += reg.gamma * reg.mu * group_norm(y, g);
    return v;
  }
  // Gradient of the full objective; valid because the entropy term keeps the
  // minimizer strictly positive, so every group norm is differentiable there.
  double full_grad_inf(const std::vector<double>& y, std::vector<double>& g) const {
    smooth_grad(y, g);
    for (const auto& grp : reg.groups) {
      double n = group_norm(y, grp);
      for (int i : grp) g[static_cast<size_t>(i)] += reg.gamma * reg.mu * y[static_cast<size_t>(i)] / n;
    }
    return linf_norm(g);
  }
  void prox(const std::vector<double>& z, double step, std::vector<double>& out) const {
    out = z;
    for (const auto& grp : reg.groups) {
      double n = group_norm(z, grp);
      double scale = n > 0.0 ? std::max(1.0 - step * reg.gamma * reg.mu / n, 0.0) : 0.0;
      for (int i : grp) out[static_cast<size_t>(i)] = scale * z[static_cast<size_t>(i)];
    }
  }
};

ConjugateValueGrad delta_omega_gl_entropy(const std::vector<double>& x, const RegParams& reg,
                                          const std::vector<double>* warm_start) {
  const size_t m = x.size();
  GlEntropyInner inner{x, reg};

  std::vector<double> y(m);
  bool warm_ok = warm_start && warm_start->size() == m;
  if (warm_ok)
    for (double v : *warm_start)
      if (!(v > 0.0) || !std::isfinite(v)) { warm_ok = false; break; }
  if (warm_ok) {
    y = *warm_start;
  } else {
    // Entropy-only maximizer as the cold start; strictly positive.
    for (size_t i = 0; i < m; ++i)
      y[i] = std::max(std::exp(std::min(x[i] / reg.gamma - 1.0, 100.0)), 1e-30);
  }

  constexpr double kInnerTol = 1e-10;
  constexpr int kMaxInner = 10000;
  std::vector<double> grad(m), z(m), trial(m);
  for (int it = 0; it < kMaxInner; ++it) {
    if (inner.full_grad_inf(y, grad) <= kInnerTol) break;

    double h = inner.smooth_value(y);
    std::vector<double> hg(m);
    inner.smooth_grad(y, hg);

    double step = reg.gamma;
    bool accepted = false;
    for (int trial_idx = 0; trial_idx < 80; ++trial_idx) {
      for (size_t i = 0; i < m; ++i) z[i] = y[i] - step * hg[i];
      inner.prox(z, step, trial);
      bool interior = true;
      for (double v : trial)
        if (!(v > 0.0)) { interior = false; break; }
      if (interior) {
        double lin = 0.0, quad = 0.0;
        for (size_t i = 0; i < m; ++i) {
          double d = trial[i] - y[i];
          lin += hg[i] * d;
          quad += d * d;
        }
        if (inner.smooth_value(trial) <= h + lin + quad / (2.0 * step)) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step collapsed; y is as good as float allows
    std::swap(y, trial);
  }

  ConjugateValueGrad out;
  out.grad = y;
  out.value = dot(x, y) - omega_of_column(y, reg);
  return out;
}

}  // namespace

SimplexThreshold simplex_projection_threshold(const std::vector<double>& x, double radius) {
  check_finite(x);
  if (!(radius > 0.0)) throw OtError(Errc::invalid_argument, "simplex radius must be positive");
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double csum = 0.0, csum_rho = sorted[0];
  int rho = 1;
  for (size_t i = 0; i < sorted.size(); ++i) {
    csum += sorted[i];
    if (sorted[i] - (csum - radius) / static_cast<double>(i + 1) > 0.0) {
      rho = static_cast<int>(i + 1);
      csum_rho = csum;
    }
  }
  return SimplexThreshold{(csum_rho - radius) / static_cast<double>(rho), rho};
}

std::vector<double> project_simplex(const std::vector<double>& x, double radius) {
  SimplexThreshold t = simplex_projection_threshold(x, radius);
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = std::max(x[i] - t.tau, 0.0);
  return y;
}

ConjugateValueGrad delta_omega(const std::vector<double>& x, const RegParams& reg,
                               const std::vector<double>* warm_start) {
  check_finite(x);
  reg.validate(static_cast<int>(x.size()));
  ConjugateValueGrad out;
  switch (reg.kind) {
    case RegKind::entropy: {
      out.grad.resize(x.size());
      double s = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        double e = x[i] / reg.gamma;
        if (e > kExpClamp) {
          e = kExpClamp;
          ++out.clamp_events;
        }
        out.grad[i] = std::exp(e - 1.0);
        s += out.grad[i];
      }
      out.value = reg.gamma * s;
      return out;
    }
    case RegKind::squared_l2: {
      out.grad.resize(x.size());
      double s = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        double p = std::max(x[i], 0.0);
        out.grad[i] = p / reg.gamma;
        s += p * p;
      }
      out.value = s / (2.0 * reg.gamma);
      return out;
    }
    case RegKind::group_lasso_l2: {
      out.grad.assign(x.size(), 0.0);
      for (const auto& grp : reg.groups) {
        double n = 0.0;
        for (int i : grp) {
          double p = std::max(x[static_cast<size_t>(i)], 0.0) / reg.gamma;
          out.grad[static_cast<size_t>(i)] = p;
          n += p * p;
        }
        n = std::sqrt(n);
        double scale = n > 0.0 ? std::max(1.0 - reg.mu / n, 0.0) : 0.0;
        for (int i : grp) out.grad[static_cast<size_t>(i)] *= scale;
      }
      out.value = dot(x, out.grad) - omega_of_column(out.grad, reg);
      return out;
    }
    case RegKind::group_lasso_entropy:
      return delta_omega_gl_entropy(x, reg, warm_start);
  }
  throw OtError(Errc::invalid_argument, "unknown regularizer kind");
}

ConjugateValueGrad max_omega(const std::vector<double>& x, const RegParams& reg, double bj) {
  check_finite(x);
  if (!(bj > 0.0)) throw OtError(Errc::invalid_argument, "bj must be positive");
  reg.validate(static_cast<int>(x.size()));
  ConjugateValueGrad out;
  switch (reg.kind) {
    case RegKind::entropy: {
      // gamma * log sum exp(x/gamma) - gamma * log bj, shifted by max(x).
      double mx = *std::max_element(x.begin(), x.end());
      out.grad.resize(x.size());
      double s = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        out.grad[i] = std::exp((x[i] - mx) / reg.gamma);
        s += out.grad[i];
      }
      for (double& g : out.grad) g /= s;
      out.value = mx + reg.gamma * std::log(s) - reg.gamma * std::log(bj);
      return out;
    }
    case RegKind::squared_l2: {
      std::vector<double> scaled(x.size());
      for (size_t i = 0; i < x.size(); ++i) scaled[i] = x[i] / (reg.gamma * bj);
      out.grad = project_simplex(scaled, 1.0);
      double sq = 0.0;
      for (double g : out.grad) sq += g * g;
      out.value = dot(x, out.grad) - 0.5 * reg.gamma * bj * sq;
      return out;
    }
    case RegKind::group_lasso_entropy:
    case RegKind::group_lasso_l2:
      throw OtError(Errc::unsupported_regularizer,
                    "max_omega has no closed form for group-lasso regularizers");
  }
  throw OtError(Errc::invalid_argument, "unknown regularizer kind");
}

double omega_of_column(const std::vector<double>& y, const RegParams& reg) {
  double v = 0.0;
  switch (reg.kind) {
    case RegKind::entropy:
    case RegKind::group_lasso_entropy:
      for (double t : y)
        if (t > 0.0) v += t * std::log(t);
      break;
    case RegKind::squared_l2:
    case RegKind::group_lasso_l2:
      for (double t : y) v += 0.5 * t * t;
      break;
  }
  if (reg.is_group_kind())
    for (const auto& grp : reg.groups) v += reg.mu * group_norm(y, grp);
  return reg.gamma * v;
}

double omega_value(const Matrix& T, const RegParams& reg) {
  reg.validate(T.rows());
  std::vector<double> col(static_cast<size_t>(T.rows()));
  double v = 0.0;
  for (int j = 0; j < T.cols(); ++j) {
    for (int i = 0; i < T.rows(); ++i) col[static_cast<size_t>(i)] = T(i, j);
    v += omega_of_column(col, reg);
  }
  return v;
}

double omega_value(const TransportPlan& T, const RegParams& reg) {
  return omega_value(T.entries, reg);
}

}  // namespace otkit
