#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "otkit/oracle.hpp"
#include "otkit/solvers.hpp"
#include "test_util.hpp"

using namespace otkit;
using testutil::SplitMix64;

namespace {

Matrix make_matrix(int m, int n, std::initializer_list<double> vals) {
  Matrix M(m, n);
  auto it = vals.begin();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = *it++;
  return M;
}

}  // namespace

TEST_CASE("solve_exact on the zero-cost matching instance") {
  Histogram a = Histogram::make({0.5, 0.5});
  Histogram b = Histogram::make({0.5, 0.5});
  CostMatrix C = CostMatrix::make(make_matrix(2, 2, {0, 1, 1, 0}));
  ExactSolution sol = solve_exact(a, b, C);
  CHECK(sol.value == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(sol.plan.entries(0, 0) == doctest::Approx(0.5));
  CHECK(sol.plan.entries(1, 1) == doctest::Approx(0.5));
  CHECK(sol.plan.entries(0, 1) == doctest::Approx(0.0));
  CHECK(sol.plan.entries(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("solve_exact on a constant-cost polytope") {
  // Every feasible plan costs 2.5; the solver must return a vertex.
  Histogram a = Histogram::make({0.5, 0.5});
  Histogram b = Histogram::make({0.5, 0.5});
  CostMatrix C = CostMatrix::make(make_matrix(2, 2, {1, 2, 3, 4}));
  ExactSolution sol = solve_exact(a, b, C);
  CHECK(sol.value == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(sol.plan.nonzeros() <= 3);
}

TEST_CASE("solve_exact matches exhaustive vertex enumeration on random instances") {
  SplitMix64 rng(211);
  for (int rep = 0; rep < 25; ++rep) {
    int m = 2 + static_cast<int>(rng.next() % 5);
    int n = 2 + static_cast<int>(rng.next() % 5);
    Histogram a = testutil::random_histogram(m, rng);
    Histogram b = testutil::random_histogram(n, rng);
    CostMatrix C = testutil::random_cost(m, n, rng);
    ExactSolution sol = solve_exact(a, b, C);
    testutil::VertexEnumerator enumerator(a.weights(), b.weights(), C.entries());
    auto brute = enumerator.run();
    CHECK(std::fabs(sol.value - brute.min_cost) <= 1e-10);
  }
}

TEST_CASE("solve_exact invariants: vertex sparsity, feasibility, dual certificate") {
  SplitMix64 rng(223);
  for (int rep = 0; rep < 30; ++rep) {
    int m = 2 + static_cast<int>(rng.next() % 7);
    int n = 2 + static_cast<int>(rng.next() % 7);
    Histogram a = testutil::random_histogram(m, rng);
    Histogram b = testutil::random_histogram(n, rng);
    CostMatrix C = testutil::random_cost(m, n, rng);
    ExactSolution sol = solve_exact(a, b, C);

    CHECK(sol.plan.nonzeros() <= m + n - 1);
    CHECK(sol.plan.row_residual <= 1e-9);
    CHECK(sol.plan.col_residual <= 1e-9);
    for (double t : sol.plan.entries.raw()) CHECK(t >= 0.0);

    REQUIRE(sol.dual.beta.has_value());
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(sol.dual.alpha[static_cast<size_t>(i)] + (*sol.dual.beta)[static_cast<size_t>(j)] <=
              C(i, j) + 1e-10);
    double dual_value = dot(sol.dual.alpha, a.weights()) + dot(*sol.dual.beta, b.weights());
    CHECK(dual_value == doctest::Approx(sol.value).epsilon(1e-9));
  }
}

TEST_CASE("solve_exact handles degenerate uniform histograms") {
  // Equal masses produce ties everywhere; Bland's rule must still terminate.
  const int n = 6;
  std::vector<double> w(n, 1.0 / n);
  Histogram a = Histogram::make(w);
  Histogram b = Histogram::make(w);
  SplitMix64 rng(227);
  CostMatrix C = testutil::random_cost(n, n, rng);
  ExactSolution sol = solve_exact(a, b, C);
  // The optimum of a doubly-uniform instance is an assignment (n cells).
  CHECK(sol.plan.nonzeros() <= 2 * n - 1);
  testutil::VertexEnumerator enumerator(a.weights(), b.weights(), C.entries());
  CHECK(std::fabs(sol.value - enumerator.run().min_cost) <= 1e-10);
}

TEST_CASE("solve_exact rejects oversized instances") {
  std::vector<double> w(1001, 1.0 / 1001);
  Histogram a = Histogram::make(w);
  Histogram b = Histogram::make(w);
  try {
    solve_exact(a, b, CostMatrix::make(Matrix(1001, 1001, 1.0)));
    FAIL("expected throw");
  } catch (const OtError& e) {
    CHECK(e.code() == Errc::size_limit_exceeded);
  }
}

TEST_CASE("plan_error examples") {
  Histogram a = Histogram::make({0.5, 0.5});
  Histogram b = Histogram::make({0.5, 0.5});
  TransportPlan T = TransportPlan::make(make_matrix(2, 2, {0.5, 0, 0, 0.5}), a, b);
  CHECK(plan_error(T, T) == 0.0);

  TransportPlan twice = TransportPlan::make(make_matrix(2, 2, {1.0, 0, 0, 1.0}), a, b);
  CHECK(plan_error(twice, T) == doctest::Approx(1.0));

  SplitMix64 rng(229);
  Matrix X(3, 3), Y(3, 3);
  for (size_t k = 0; k < X.size(); ++k) {
    X.data()[k] = rng.uniform01();
    Y.data()[k] = rng.uniform01();
  }
  Histogram u3 = Histogram::normalized({1, 1, 1});
  TransportPlan px = TransportPlan::make(X, u3, u3);
  TransportPlan py = TransportPlan::make(Y, u3, u3);
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < X.size(); ++k) {
    num += (X.data()[k] - Y.data()[k]) * (X.data()[k] - Y.data()[k]);
    den += Y.data()[k] * Y.data()[k];
  }
  CHECK(plan_error(px, py) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-12));

  TransportPlan zero = TransportPlan::make(Matrix(2, 2, 0.0), a, b);
  try {
    plan_error(T, zero);
    FAIL("expected throw");
  } catch (const OtError& e) {
    CHECK(e.code() == Errc::zero_reference);
  }
}

TEST_CASE("reg_value_error of a converged squared_l2 solve sits inside gamma*U") {
  SplitMix64 rng(239);
  Histogram a = testutil::random_histogram(8, rng);
  Histogram b = testutil::random_histogram(8, rng);
  CostMatrix C = testutil::random_cost(8, 8, rng);
  ExactSolution exact = solve_exact(a, b, C);

  const double gamma = 1e-3;
  otkit::SolveOptions opts;
  opts.max_iters = 20000;
  opts.grad_tol = 1e-8;
  otkit::DualSolution sol = otkit::solve_semidual(a, b, C, RegParams::squared_l2(gamma), opts);
  ValueErrors errs = value_errors(sol.plan, sol.report.final_objective, exact, a, b, C);
  double U = 0.0;
  {
    double na = 0.0, nb = 0.0;
    for (double w : a.weights()) na += w * w;
    for (double w : b.weights()) nb += w * w;
    U = 0.5 * std::min(na, nb);
  }
  CHECK(errs.reg_value_error <= gamma * U + 1e-6);
}

TEST_CASE("value_errors examples") {
  SplitMix64 rng(233);
  Histogram a = testutil::random_histogram(4, rng);
  Histogram b = testutil::random_histogram(4, rng);
  CostMatrix C = testutil::random_cost(4, 4, rng);
  ExactSolution exact = solve_exact(a, b, C);

  // Perfect candidate: all errors vanish.
  ValueErrors perfect = value_errors(exact.plan, exact.value, exact, a, b, C);
  REQUIRE(perfect.value_error.has_value());
  CHECK(*perfect.value_error <= 1e-12);
  CHECK(perfect.reg_value_error <= 1e-12);
  CHECK(perfect.marginal_error <= 2e-9);

  // Feasible but different plan: marginal error stays at feasibility level.
  Matrix T(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) T(i, j) = a[i] * b[j];
  TransportPlan indep = TransportPlan::make(std::move(T), a, b);
  ValueErrors errs = value_errors(indep, primal_value(indep, C), exact, a, b, C);
  CHECK(errs.marginal_error <= 2e-9);

  // Zero-cost reference: value_error is undefined, the others remain.
  Histogram u = Histogram::make({0.5, 0.5});
  CostMatrix zeroC = CostMatrix::make(Matrix(2, 2, 0.0));
  ExactSolution zexact = solve_exact(u, u, zeroC);
  TransportPlan diag = TransportPlan::make(make_matrix(2, 2, {0.5, 0, 0, 0.5}), u, u);
  ValueErrors zerrs = value_errors(diag, 0.0, zexact, u, u, zeroC);
  CHECK_FALSE(zerrs.value_error.has_value());
  CHECK(zerrs.reg_value_error == doctest::Approx(0.0));
}
