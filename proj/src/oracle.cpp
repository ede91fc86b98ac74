#include "otkit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace otkit {

namespace {

// Transportation-specialized network simplex. Nodes 0..m-1 are rows,
// m..m+n-1 are columns; a basis is a spanning tree whose edges are cells of
// the plan.
class TransportSimplex {
 public:
  TransportSimplex(const Histogram& a, const Histogram& b, const CostMatrix& C)
      : m_(a.dim()), n_(b.dim()), a_(a.weights()), b_(b.weights()), C_(C),
        flow_(m_, n_), in_basis_(static_cast<size_t>(m_) * n_, 0),
        adj_(static_cast<size_t>(m_ + n_)),
        alpha_(static_cast<size_t>(m_), 0.0), beta_(static_cast<size_t>(n_), 0.0) {
    enter_eps_ = 1e-11 * (1.0 + C.max_abs());
  }

  void run() {
    northwest_corner();
    // Bland's rule terminates, but guard against float pathologies anyway.
    const long max_pivots = 1000L * (m_ + n_) * (m_ + n_) + 100000L;
    for (long pivot = 0;; ++pivot) {
      if (pivot > max_pivots)
        throw OtError(Errc::invalid_argument, "network simplex exceeded pivot budget");
      compute_duals();
      int entering = find_entering();
      if (entering < 0) break;
      pivot_on(entering);
    }
  }

  ExactSolution extract(const Histogram& a, const Histogram& b) const {
    ExactSolution sol;
    sol.plan = TransportPlan::make(flow_, a, b);
    sol.value = 0.0;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) sol.value += flow_(i, j) * C_(i, j);
    sol.dual.alpha = alpha_;
    sol.dual.beta = beta_;
    return sol;
  }

 private:
  int cell_id(int i, int j) const { return i * n_ + j; }
  int cell_row(int c) const { return c / n_; }
  int cell_col(int c) const { return c % n_; }

  void add_basis(int c) {
    in_basis_[static_cast<size_t>(c)] = 1;
    adj_[static_cast<size_t>(cell_row(c))].push_back(c);
    adj_[static_cast<size_t>(m_ + cell_col(c))].push_back(c);
  }

  void remove_basis(int c) {
    in_basis_[static_cast<size_t>(c)] = 0;
    for (int node : {cell_row(c), m_ + cell_col(c)}) {
      auto& list = adj_[static_cast<size_t>(node)];
      for (size_t k = 0; k < list.size(); ++k)
        if (list[k] == c) {
          list[k] = list.back();
          list.pop_back();
          break;
        }
    }
  }

  // Staircase initial basis with exactly m+n-1 cells (ties produce
  // degenerate zero-flow cells).
  void northwest_corner() {
    std::vector<double> ra = a_, rb = b_;
    int i = 0, j = 0;
    for (int k = 0; k < m_ + n_ - 1; ++k) {
      double t = std::max(0.0, std::min(ra[static_cast<size_t>(i)], rb[static_cast<size_t>(j)]));
      flow_(i, j) = t;
      ra[static_cast<size_t>(i)] -= t;
      rb[static_cast<size_t>(j)] -= t;
      add_basis(cell_id(i, j));
      if (i == m_ - 1 && j == n_ - 1) break;
      if (j == n_ - 1) ++i;
      else if (i == m_ - 1) ++j;
      else if (ra[static_cast<size_t>(i)] <= rb[static_cast<size_t>(j)]) ++i;
      else ++j;
    }
  }

  // alpha_i + beta_j = C_ij on basic cells, rooted at alpha_0 = 0.
  void compute_duals() {
    std::vector<char> visited(static_cast<size_t>(m_ + n_), 0);
    std::vector<int> stack{0};
    visited[0] = 1;
    alpha_[0] = 0.0;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int c : adj_[static_cast<size_t>(u)]) {
        int i = cell_row(c), j = cell_col(c);
        int v = (u < m_) ? m_ + j : i;
        if (visited[static_cast<size_t>(v)]) continue;
        visited[static_cast<size_t>(v)] = 1;
        if (u < m_)
          beta_[static_cast<size_t>(j)] = C_(i, j) - alpha_[static_cast<size_t>(i)];
        else
          alpha_[static_cast<size_t>(i)] = C_(i, j) - beta_[static_cast<size_t>(j)];
        stack.push_back(v);
      }
    }
  }

  // First cell in row-major order with negative reduced cost (Bland).
  int find_entering() const {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) {
        int c = cell_id(i, j);
        if (in_basis_[static_cast<size_t>(c)]) continue;
        double reduced = C_(i, j) - alpha_[static_cast<size_t>(i)] - beta_[static_cast<size_t>(j)];
        if (reduced < -enter_eps_) return c;
      }
    return -1;
  }

  // Tree path between the endpoints of the entering cell; the entering cell
  // carries +theta and path cells alternate starting with -theta.
  std::vector<int> tree_path(int from, int to) const {
    std::vector<int> parent_cell(static_cast<size_t>(m_ + n_), -1);
    std::vector<int> parent_node(static_cast<size_t>(m_ + n_), -1);
    std::vector<char> visited(static_cast<size_t>(m_ + n_), 0);
    std::vector<int> stack{from};
    visited[static_cast<size_t>(from)] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      if (u == to) break;
      for (int c : adj_[static_cast<size_t>(u)]) {
        int v = (u < m_) ? m_ + cell_col(c) : cell_row(c);
        if (visited[static_cast<size_t>(v)]) continue;
        visited[static_cast<size_t>(v)] = 1;
        parent_cell[static_cast<size_t>(v)] = c;
        parent_node[static_cast<size_t>(v)] = u;
        stack.push_back(v);
      }
    }
    std::vector<int> path;
    for (int v = to; v != from; v = parent_node[static_cast<size_t>(v)])
      path.push_back(parent_cell[static_cast<size_t>(v)]);
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot_on(int entering) {
    int i0 = cell_row(entering), j0 = cell_col(entering);
    std::vector<int> path = tree_path(i0, m_ + j0);

    // Ratio test over the -theta cells (odd path positions, 1-based).
    double theta = -1.0;
    int leaving = -1;
    for (size_t t = 0; t < path.size(); t += 2) {
      int c = path[t];
      double f = flow_(cell_row(c), cell_col(c));
      if (leaving < 0 || f < theta - 1e-15 ||
          (std::fabs(f - theta) <= 1e-15 && c < leaving)) {
        theta = f;
        leaving = c;
      }
    }
    theta = std::max(theta, 0.0);

    flow_(i0, j0) = theta;
    for (size_t t = 0; t < path.size(); ++t) {
      int c = path[t];
      double& f = flow_(cell_row(c), cell_col(c));
      f += (t % 2 == 0) ? -theta : theta;
      if (f < 0.0) f = 0.0;  // rounding guard
    }
    remove_basis(leaving);
    flow_(cell_row(leaving), cell_col(leaving)) = 0.0;
    add_basis(entering);
  }

  int m_, n_;
  std::vector<double> a_, b_;
  const CostMatrix& C_;
  Matrix flow_;
  std::vector<char> in_basis_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> alpha_, beta_;
  double enter_eps_;
};

}  // namespace

ExactSolution solve_exact(const Histogram& a, const Histogram& b, const CostMatrix& C) {
  validate_instance(a, b, C);
  if (static_cast<long long>(a.dim()) * b.dim() > 1000000LL)
    throw OtError(Errc::size_limit_exceeded, "exact oracle is limited to m*n <= 1e6");
  TransportSimplex simplex(a, b, C);
  simplex.run();
  return simplex.extract(a, b);
}

double plan_error(const TransportPlan& T, const TransportPlan& T_star) {
  if (!T.entries.same_shape(T_star.entries))
    throw OtError(Errc::dimension_mismatch, "plan shapes differ");
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < T.entries.size(); ++k) {
    double d = T.entries.data()[k] - T_star.entries.data()[k];
    num += d * d;
    den += T_star.entries.data()[k] * T_star.entries.data()[k];
  }
  if (den == 0.0) throw OtError(Errc::zero_reference, "reference plan is zero");
  return std::sqrt(num) / std::sqrt(den);
}

ValueErrors value_errors(const TransportPlan& T, double v_reg, const ExactSolution& exact,
                         const Histogram& a, const Histogram& b, const CostMatrix& C) {
  if (!T.entries.same_shape(exact.plan.entries))
    throw OtError(Errc::dimension_mismatch, "plan shapes differ");
  ValueErrors out;
  double ref = exact.value;
  double cost = primal_value(T, C);
  if (ref != 0.0) out.value_error = std::fabs(cost - ref) / ref;
  out.reg_value_error = std::fabs(v_reg - ref);

  std::vector<double> r = T.entries.row_sums(), c = T.entries.col_sums();
  for (int i = 0; i < a.dim(); ++i) r[static_cast<size_t>(i)] -= a[i];
  for (int j = 0; j < b.dim(); ++j) c[static_cast<size_t>(j)] -= b[j];
  out.marginal_error = l2_norm(r) + l2_norm(c);
  return out;
}

}  // namespace otkit
