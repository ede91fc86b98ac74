#include "otkit/core.hpp"

#include <cmath>
#include <cstdlib>

namespace otkit {

std::vector<double> Matrix::row_sums() const {
  std::vector<double> r(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j);
    r[i] = s;
  }
  return r;
}

std::vector<double> Matrix::col_sums() const {
  std::vector<double> c(cols_, 0.0);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) c[j] += (*this)(i, j);
  return c;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double linf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double linf_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Histogram Histogram::make(std::vector<double> weights) {
  if (weights.empty())
    throw OtError(Errc::invalid_argument, "histogram must have positive dimension");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw OtError(Errc::non_finite_input, "histogram entry is not finite");
    if (w <= 0.0) throw OtError(Errc::non_positive_mass, "histogram entries must be strictly positive");
    total += w;
  }
  if (std::fabs(total - 1.0) > kSumTolerance)
    throw OtError(Errc::not_normalized,
                  "histogram sums to " + std::to_string(total) + ", expected 1");
  for (double& w : weights) w /= total;
  return Histogram(std::move(weights));
}

Histogram Histogram::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0))
    throw OtError(Errc::non_positive_mass, "cannot normalize a non-positive total mass");
  for (double& w : weights) w /= total;
  return make(std::move(weights));
}

CostMatrix CostMatrix::make(Matrix entries) {
  for (int i = 0; i < entries.rows(); ++i)
    for (int j = 0; j < entries.cols(); ++j) {
      double c = entries(i, j);
      if (!std::isfinite(c)) throw OtError(Errc::non_finite_input, "cost entry is not finite");
      if (c < 0.0) throw OtError(Errc::negative_cost, "cost entries must be nonnegative");
    }
  return CostMatrix(std::move(entries));
}

double CostMatrix::max_abs() const {
  double m = 0.0;
  for (double c : entries_.raw()) m = std::max(m, std::fabs(c));
  return m;
}

TransportPlan TransportPlan::make(Matrix entries, const Histogram& a, const Histogram& b) {
  if (entries.rows() != a.dim() || entries.cols() != b.dim())
    throw OtError(Errc::dimension_mismatch, "plan shape does not match histograms");
  for (double t : entries.raw())
    if (!(t >= 0.0) || !std::isfinite(t))
      throw OtError(Errc::invalid_argument, "plan entries must be finite and nonnegative");
  TransportPlan plan;
  auto rows = entries.row_sums();
  auto cols = entries.col_sums();
  plan.row_residual = linf_diff(rows, a.weights());
  plan.col_residual = linf_diff(cols, b.weights());
  plan.entries = std::move(entries);
  return plan;
}

double TransportPlan::sparsity() const {
  size_t zeros = 0;
  for (double t : entries.raw()) zeros += (t == 0.0);
  return static_cast<double>(zeros) / static_cast<double>(entries.size());
}

int TransportPlan::nonzeros() const {
  int nnz = 0;
  for (double t : entries.raw()) nnz += (t != 0.0);
  return nnz;
}

const char* reg_kind_name(RegKind kind) {
  switch (kind) {
    case RegKind::entropy: return "entropy";
    case RegKind::squared_l2: return "squared_l2";
    case RegKind::group_lasso_entropy: return "group_lasso_entropy";
    case RegKind::group_lasso_l2: return "group_lasso_l2";
  }
  return "unknown";
}

RegParams RegParams::entropy(double gamma) { return RegParams{RegKind::entropy, gamma, 0.0, {}}; }

RegParams RegParams::squared_l2(double gamma) {
  return RegParams{RegKind::squared_l2, gamma, 0.0, {}};
}

RegParams RegParams::group_lasso_entropy(double gamma, double mu,
                                         std::vector<std::vector<int>> groups) {
  return RegParams{RegKind::group_lasso_entropy, gamma, mu, std::move(groups)};
}

RegParams RegParams::group_lasso_l2(double gamma, double mu,
                                    std::vector<std::vector<int>> groups) {
  return RegParams{RegKind::group_lasso_l2, gamma, mu, std::move(groups)};
}

void RegParams::validate(int m) const {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw OtError(Errc::invalid_argument, "gamma must be strictly positive");
  if (mu < 0.0 || !std::isfinite(mu))
    throw OtError(Errc::invalid_argument, "mu must be nonnegative");
  if (!is_group_kind()) return;
  std::vector<int> seen(static_cast<size_t>(m), 0);
  for (const auto& g : groups) {
    if (g.empty()) throw OtError(Errc::invalid_groups, "empty group");
    for (int idx : g) {
      if (idx < 0 || idx >= m)
        throw OtError(Errc::invalid_groups, "group index out of range");
      if (seen[static_cast<size_t>(idx)]++)
        throw OtError(Errc::invalid_groups, "row index appears in two groups");
    }
  }
  for (int i = 0; i < m; ++i)
    if (!seen[static_cast<size_t>(i)])
      throw OtError(Errc::invalid_groups, "groups must cover every row index");
}

void validate_instance(const Histogram& a, const Histogram& b, const CostMatrix& C) {
  if (C.rows() != a.dim() || C.cols() != b.dim())
    throw OtError(Errc::dimension_mismatch, "cost matrix shape does not match histograms");
}

void validate_instance(const std::vector<double>& a, const std::vector<double>& b,
                       const Matrix& C) {
  Histogram ha = Histogram::make(a);
  Histogram hb = Histogram::make(b);
  validate_instance(ha, hb, CostMatrix::make(C));
}

double primal_value(const Matrix& T, const CostMatrix& C) {
  if (!T.same_shape(C.entries()))
    throw OtError(Errc::dimension_mismatch, "plan and cost shapes differ");
  double v = 0.0;
  for (int i = 0; i < T.rows(); ++i)
    for (int j = 0; j < T.cols(); ++j) v += T(i, j) * C(i, j);
  return v;
}

double primal_value(const TransportPlan& T, const CostMatrix& C) {
  return primal_value(T.entries, C);
}

std::vector<double> c_transform(const std::vector<double>& alpha, const CostMatrix& C) {
  if (static_cast<int>(alpha.size()) != C.rows())
    throw OtError(Errc::dimension_mismatch, "alpha length does not match cost rows");
  std::vector<double> beta(static_cast<size_t>(C.cols()));
  for (int j = 0; j < C.cols(); ++j) {
    double best = C(0, j) - alpha[0];
    for (int i = 1; i < C.rows(); ++i) best = std::min(best, C(i, j) - alpha[static_cast<size_t>(i)]);
    beta[static_cast<size_t>(j)] = best;
  }
  return beta;
}

double semi_dual_value(const std::vector<double>& alpha, const Histogram& a,
                       const Histogram& b, const CostMatrix& C) {
  validate_instance(a, b, C);
  if (static_cast<int>(alpha.size()) != a.dim())
    throw OtError(Errc::dimension_mismatch, "alpha length does not match a");
  double value = dot(alpha, a.weights());
  for (int j = 0; j < C.cols(); ++j) {
    double best = alpha[0] - C(0, j);
    for (int i = 1; i < C.rows(); ++i)
      best = std::max(best, alpha[static_cast<size_t>(i)] - C(i, j));
    value -= b[j] * best;
  }
  return value;
}

}  // namespace otkit
