#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace otkit {

// Error taxonomy shared across the library. enum values double as CLI exit codes.
enum class Errc {
  dimension_mismatch = 2,
  non_positive_mass = 3,
  not_normalized = 4,
  negative_cost = 5,
  non_finite_input = 6,
  unsupported_regularizer = 7,
  invalid_groups = 8,
  size_limit_exceeded = 9,
  zero_reference = 10,
  too_few_colors = 11,
  io_error = 12,
  invalid_argument = 13,
};

class OtError : public std::runtime_error {
 public:
  OtError(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// Dense row-major matrix of doubles. All storage in this library is dense;
// desk-scale problems do not warrant sparse formats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows <= 0 || cols <= 0)
      throw OtError(Errc::invalid_argument, "matrix dimensions must be positive");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& raw() const { return data_; }

  // T 1_n, summed in fixed column order.
  std::vector<double> row_sums() const;
  // T^t 1_m, summed in fixed row order.
  std::vector<double> col_sums() const;

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Small dense-vector helpers used throughout.
double dot(const std::vector<double>& a, const std::vector<double>& b);
double sum(const std::vector<double>& v);
double linf_norm(const std::vector<double>& v);
double l2_norm(const std::vector<double>& v);
double linf_diff(const std::vector<double>& a, const std::vector<double>& b);

// Probability vector on the simplex; strictly positive entries required.
// Inputs whose sum deviates from 1 by more than kSumTolerance are rejected,
// anything closer is renormalized exactly so downstream duality-gap math is
// not polluted by input noise.
class Histogram {
 public:
  static constexpr double kSumTolerance = 1e-12;

  // Validates (positivity, normalization) and renormalizes.
  static Histogram make(std::vector<double> weights);
  // Divides by the sum first; for raw positive weights such as pixel counts.
  static Histogram normalized(std::vector<double> weights);

  int dim() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  double operator[](int i) const { return weights_[static_cast<size_t>(i)]; }

 private:
  explicit Histogram(std::vector<double> w) : weights_(std::move(w)) {}
  std::vector<double> weights_;
};

// Nonnegative finite ground-cost matrix.
class CostMatrix {
 public:
  static CostMatrix make(Matrix entries);

  int rows() const { return entries_.rows(); }
  int cols() const { return entries_.cols(); }
  double operator()(int i, int j) const { return entries_(i, j); }
  const Matrix& entries() const { return entries_; }
  double max_abs() const;

 private:
  explicit CostMatrix(Matrix m) : entries_(std::move(m)) {}
  Matrix entries_;
};

// Transportation plan with marginal-residual metadata relative to the
// histograms it was produced for.
struct TransportPlan {
  Matrix entries;
  double row_residual = 0.0;  // max_i |sum_j T_ij - a_i|
  double col_residual = 0.0;  // max_j |sum_i T_ij - b_j|

  static TransportPlan make(Matrix entries, const Histogram& a, const Histogram& b);

  // Fraction of exactly-zero entries.
  double sparsity() const;
  int nonzeros() const;
};

struct DualPotentials {
  std::vector<double> alpha;
  std::optional<std::vector<double>> beta;
};

enum class RegKind { entropy, squared_l2, group_lasso_entropy, group_lasso_l2 };

const char* reg_kind_name(RegKind kind);

// Regularizer parameters: Omega is gamma-scaled, mu weighs the group-lasso
// term, groups partition the row index set [m] and are shared by all columns.
struct RegParams {
  RegKind kind = RegKind::squared_l2;
  double gamma = 1.0;
  double mu = 0.0;
  std::vector<std::vector<int>> groups;

  static RegParams entropy(double gamma);
  static RegParams squared_l2(double gamma);
  static RegParams group_lasso_entropy(double gamma, double mu,
                                       std::vector<std::vector<int>> groups);
  static RegParams group_lasso_l2(double gamma, double mu,
                                  std::vector<std::vector<int>> groups);

  bool is_group_kind() const {
    return kind == RegKind::group_lasso_entropy || kind == RegKind::group_lasso_l2;
  }

  // gamma > 0, mu >= 0; for group kinds, groups must partition [m].
  void validate(int m) const;
};

// Full instance validation: shape compatibility plus every type invariant.
// The raw overload exists so error paths are reachable from unchecked input.
void validate_instance(const Histogram& a, const Histogram& b, const CostMatrix& C);
void validate_instance(const std::vector<double>& a, const std::vector<double>& b,
                       const Matrix& C);

// <T, C> = sum_ij T_ij C_ij, summed row-major.
double primal_value(const Matrix& T, const CostMatrix& C);
double primal_value(const TransportPlan& T, const CostMatrix& C);

// beta_j = min_i (C_ij - alpha_i); ties resolved at the smallest i.
std::vector<double> c_transform(const std::vector<double>& alpha, const CostMatrix& C);

// alpha^t a - sum_j b_j max_i (alpha_i - C_ij), the unsmoothed semi-dual.
double semi_dual_value(const std::vector<double>& alpha, const Histogram& a,
                       const Histogram& b, const CostMatrix& C);

}  // namespace otkit
