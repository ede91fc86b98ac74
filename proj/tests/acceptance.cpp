// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Every threshold is pinned in code; nothing is tuned at
// run time.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "otkit/bounds.hpp"
#include "otkit/colortransfer.hpp"
#include "otkit/core.hpp"
#include "otkit/image.hpp"
#include "otkit/oracle.hpp"
#include "otkit/solvers.hpp"
#include "test_util.hpp"

using namespace otkit;
using testutil::SplitMix64;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Instance {
  Histogram a;
  Histogram b;
  CostMatrix C;
};

Instance random_instance(int m, int n, SplitMix64& rng) {
  return Instance{testutil::random_histogram(m, rng), testutil::random_histogram(n, rng),
                  testutil::random_cost(m, n, rng)};
}

// Smooth synthetic test rasters with plenty of distinct colors.
Image synthetic_image(int w, int h, int flavor) {
  Image img = Image::create(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t* px = img.at(x, y);
      if (flavor == 0) {
        px[0] = static_cast<std::uint8_t>(x * 255 / (w - 1));
        px[1] = static_cast<std::uint8_t>(y * 255 / (h - 1));
        px[2] = static_cast<std::uint8_t>((x + y) * 255 / (w + h - 2));
      } else {
        px[0] = static_cast<std::uint8_t>(230 - x * 180 / (w - 1));
        px[1] = static_cast<std::uint8_t>(30 + (x * 2 + y) * 160 / (2 * (w - 1) + h - 1));
        px[2] = static_cast<std::uint8_t>(255 - y * 220 / (h - 1));
      }
    }
  return img;
}

// ---------------------------------------------------------------------------

// 1. Network-simplex value vs exhaustive vertex enumeration, 200 instances
//    with sizes covering every (m, n) in {2..6}^2, within 1e-10, under 10 s.
//    Instances are generated up front and fanned out over a few workers; the
//    reduction is a max, so the result does not depend on scheduling.
Outcome criterion1() {
  Outcome out;
  auto t0 = Clock::now();
  SplitMix64 rng(20240817);
  std::vector<Instance> instances;
  instances.reserve(200);
  for (int m = 2; m <= 6; ++m)
    for (int n = 2; n <= 6; ++n)
      for (int rep = 0; rep < 8; ++rep) instances.push_back(random_instance(m, n, rng));

  // Largest instances first so the parallel tail is short.
  std::vector<size_t> order(instances.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return instances[x].a.dim() * instances[x].b.dim() >
           instances[y].a.dim() * instances[y].b.dim();
  });

  const int workers =
      std::max(1, std::min(8, static_cast<int>(std::thread::hardware_concurrency())));
  std::atomic<size_t> next{0};
  std::vector<double> worst_per_worker(static_cast<size_t>(workers), 0.0);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (size_t idx = next.fetch_add(1); idx < instances.size(); idx = next.fetch_add(1)) {
        const Instance& inst = instances[order[idx]];
        ExactSolution sol = solve_exact(inst.a, inst.b, inst.C);
        testutil::VertexEnumerator enumerator(inst.a.weights(), inst.b.weights(),
                                              inst.C.entries());
        double brute = enumerator.run().min_cost;
        worst_per_worker[static_cast<size_t>(w)] = std::max(
            worst_per_worker[static_cast<size_t>(w)], std::fabs(sol.value - brute));
      }
    });
  }
  for (auto& th : pool) th.join();
  double worst = 0.0;
  for (double v : worst_per_worker) worst = std::max(worst, v);

  double secs = seconds_since(t0);
  out.pass = instances.size() == 200 && worst <= 1e-10 && secs < 10.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "200 instances, max |simplex - enumeration| = %.2e, %.1f s",
                worst, secs);
  out.detail = buf;
  return out;
}

// Shared 8x8 instance set for the two sandwich criteria.
const std::vector<Instance>& sandwich_instances() {
  static const std::vector<Instance> instances = [] {
    SplitMix64 rng(811);
    std::vector<Instance> set;
    set.reserve(50);
    for (int rep = 0; rep < 50; ++rep) set.push_back(random_instance(8, 8, rng));
    return set;
  }();
  return instances;
}

// 2. Regularization-gap sandwich for entropy and squared_l2 over gamma in
//    {0.01, 0.1, 1} on 50 random 8x8 instances, under 2 min.
Outcome criterion2() {
  Outcome out;
  auto t0 = Clock::now();
  SolveOptions opts;
  opts.max_iters = 20000;
  opts.grad_tol = 1e-7;

  int checked = 0, failed = 0;
  for (const Instance& inst : sandwich_instances()) {
    double ot = solve_exact(inst.a, inst.b, inst.C).value;
    for (RegKind kind : {RegKind::entropy, RegKind::squared_l2}) {
      RegularizationGapBounds t1 = regularization_gap_bounds(inst.a, inst.b, kind);
      for (double gamma : {0.01, 0.1, 1.0}) {
        RegParams reg = kind == RegKind::entropy ? RegParams::entropy(gamma)
                                                 : RegParams::squared_l2(gamma);
        DualSolution sol = solve_semidual(inst.a, inst.b, inst.C, reg, opts);
        ++checked;
        if (!verify_sandwich(sol.report.final_objective, ot, t1.L, t1.U, gamma, opts.grad_tol))
          ++failed;
      }
    }
  }
  double secs = seconds_since(t0);
  out.pass = failed == 0 && secs < 120.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d sandwiches, %d violations, %.1f s", checked, failed, secs);
  out.detail = buf;
  return out;
}

// 3. Relaxation-gap sandwich for the relaxed and semi-relaxed primals on the same
//    gamma grid and instance count, under 2 min.
Outcome criterion3() {
  Outcome out;
  auto t0 = Clock::now();
  SolveOptions opts;
  opts.max_iters = 100000;
  opts.grad_tol = 1e-6;

  int checked = 0, failed = 0;
  for (const Instance& inst : sandwich_instances()) {
    double ot = solve_exact(inst.a, inst.b, inst.C).value;
    RelaxationGapBounds t2 = relaxation_gap_bounds(inst.a, inst.b, inst.C);
    for (double gamma : {0.01, 0.1, 1.0}) {
      PrimalSolution relaxed =
          solve_relaxed_primal(inst.a, inst.b, inst.C, RelaxationParams{gamma}, opts);
      ++checked;
      if (!verify_sandwich(relaxed.report.final_objective, ot, -t2.L, 0.0, gamma, opts.grad_tol))
        ++failed;
      PrimalSolution semi =
          solve_semi_relaxed_primal(inst.a, inst.b, inst.C, RelaxationParams{gamma}, opts);
      ++checked;
      if (!verify_sandwich(semi.report.final_objective, ot, -t2.L_tilde, 0.0, gamma,
                           opts.grad_tol))
        ++failed;
    }
  }
  double secs = seconds_since(t0);
  out.pass = failed == 0 && secs < 120.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d sandwiches, %d violations, %.1f s", checked, failed, secs);
  out.detail = buf;
  return out;
}

// 4. Analytic vs central-difference gradients for the dual, semi-dual and
//    relaxed-primal objectives; 20 random points each, |fd - g| <= 1e-5 (1+|g|).
Outcome criterion4() {
  Outcome out;
  SplitMix64 rng(813);
  const double tol = 1e-5;
  int failures = 0;

  Instance inst = random_instance(5, 4, rng);
  std::vector<RegParams> dual_regs = {RegParams::entropy(0.7), RegParams::squared_l2(0.9),
                                      RegParams::group_lasso_l2(0.8, 0.4, {{0, 1, 2}, {3, 4}}),
                                      RegParams::group_lasso_entropy(0.8, 0.2, {{0, 1, 2}, {3, 4}})};
  for (int point = 0; point < 20; ++point) {
    const RegParams& reg = dual_regs[static_cast<size_t>(point % 4)];
    std::vector<double> alpha = testutil::random_vector(5, rng, -0.5, 0.5);
    std::vector<double> beta = testutil::random_vector(4, rng, -0.5, 0.5);
    auto d = dual_objective_grad(alpha, beta, inst.a, inst.b, inst.C, reg);
    std::vector<double> z = alpha;
    z.insert(z.end(), beta.begin(), beta.end());
    auto fd = testutil::central_difference(
        [&](const std::vector<double>& zz) {
          std::vector<double> al(zz.begin(), zz.begin() + 5), be(zz.begin() + 5, zz.end());
          return dual_objective_grad(al, be, inst.a, inst.b, inst.C, reg).value;
        },
        z);
    std::vector<double> grad = d.grad_alpha;
    grad.insert(grad.end(), d.grad_beta.begin(), d.grad_beta.end());
    if (!testutil::gradients_close(fd, grad, tol)) ++failures;
  }

  for (int point = 0; point < 20; ++point) {
    RegParams reg = point % 2 ? RegParams::entropy(0.6) : RegParams::squared_l2(1.1);
    std::vector<double> alpha = testutil::random_vector(5, rng, -0.5, 0.5);
    auto d = semi_dual_objective_grad(alpha, inst.a, inst.b, inst.C, reg);
    auto fd = testutil::central_difference(
        [&](const std::vector<double>& z) {
          return semi_dual_objective_grad(z, inst.a, inst.b, inst.C, reg).value;
        },
        alpha);
    if (!testutil::gradients_close(fd, d.grad, tol)) ++failures;
  }

  RelaxationParams rel{0.5};
  for (int point = 0; point < 20; ++point) {
    Matrix T(5, 4);
    for (size_t k = 0; k < T.size(); ++k) T.data()[k] = rng.uniform(0.0, 0.4);
    auto f = relaxed_primal_objective_grad(T, inst.a, inst.b, inst.C, rel);
    std::vector<double> flat(T.data(), T.data() + T.size());
    auto fd = testutil::central_difference(
        [&](const std::vector<double>& z) {
          Matrix Z(5, 4);
          std::copy(z.begin(), z.end(), Z.data());
          return relaxed_primal_objective_grad(Z, inst.a, inst.b, inst.C, rel).value;
        },
        flat);
    std::vector<double> grad(f.grad.data(), f.grad.data() + f.grad.size());
    if (!testutil::gradients_close(fd, grad, tol)) ++failures;
  }

  out.pass = failures == 0;
  out.detail = "60 gradient checks, " + std::to_string(failures) + " failures";
  return out;
}

// 5. Entropy alternating minimization matches an independent Sinkhorn scaling
//    implementation to <= 1e-10 per sweep, 100 sweeps, 16x16.
Outcome criterion5() {
  Outcome out;
  SplitMix64 rng(814);
  Instance inst = random_instance(16, 16, rng);
  const double gamma = 0.2;
  testutil::SinkhornReference ref(inst.a, inst.b, inst.C, gamma);

  SolveOptions opts;
  opts.grad_tol = 1e-300;
  double worst = 0.0;
  for (int sweeps = 1; sweeps <= 100; ++sweeps) {
    opts.max_iters = sweeps;
    DualSolution sol =
        alternating_minimization(inst.a, inst.b, inst.C, RegParams::entropy(gamma), opts);
    ref.sweep();
    for (int i = 0; i < 16; ++i) {
      double u = std::exp(sol.potentials.alpha[static_cast<size_t>(i)] / gamma - 1.0);
      worst = std::max(worst, std::fabs(u - ref.u[static_cast<size_t>(i)]) /
                                  (1.0 + std::fabs(ref.u[static_cast<size_t>(i)])));
    }
    for (int j = 0; j < 16; ++j) {
      double v = std::exp((*sol.potentials.beta)[static_cast<size_t>(j)] / gamma);
      worst = std::max(worst, std::fabs(v - ref.v[static_cast<size_t>(j)]) /
                                  (1.0 + std::fabs(ref.v[static_cast<size_t>(j)])));
    }
  }
  out.pass = worst <= 1e-10;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "100 sweeps, max scaling deviation = %.2e", worst);
  out.detail = buf;
  return out;
}

// 6. Dual and semi-dual optimal values agree within 1e-5 relative on 20
//    random 16x16 instances at gamma = 0.1, for both regularizers.
Outcome criterion6() {
  Outcome out;
  SplitMix64 rng(815);
  SolveOptions opts;
  opts.max_iters = 20000;
  opts.grad_tol = 1e-8;
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Instance inst = random_instance(16, 16, rng);
    for (RegParams reg : {RegParams::entropy(0.1), RegParams::squared_l2(0.1)}) {
      DualSolution dual = solve_dual(inst.a, inst.b, inst.C, reg, opts);
      DualSolution semi = solve_semidual(inst.a, inst.b, inst.C, reg, opts);
      double rel = std::fabs(dual.report.final_objective - semi.report.final_objective) /
                   (1.0 + std::fabs(semi.report.final_objective));
      worst = std::max(worst, rel);
    }
  }
  out.pass = worst <= 1e-5;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "40 solve pairs, max relative gap = %.2e", worst);
  out.detail = buf;
  return out;
}

// 7. Sparsity dichotomy on 32x32 instances built from two quantized synthetic
//    images: entropy semi-dual has no exact zeros; squared_l2 semi-dual
//    reaches >= 80% zeros for some gamma in {1e-2, 1e-1, 1, 10}; the exact LP
//    plan has <= m+n-1 nonzeros.
Outcome criterion7() {
  Outcome out;
  Image img_a = synthetic_image(64, 64, 0);
  Image img_b = synthetic_image(64, 64, 1);
  Palette pa = quantize(img_a, 32, 1);
  Palette pb = quantize(img_b, 32, 2);
  CostMatrix C = build_cost(pa, pb);
  const Histogram& a = pa.histogram;
  const Histogram& b = pb.histogram;

  SolveOptions opts;
  opts.max_iters = 20000;
  opts.grad_tol = 1e-7;

  DualSolution entropy_sol = solve_semidual(a, b, C, RegParams::entropy(1.0), opts);
  bool entropy_dense = entropy_sol.plan.sparsity() == 0.0;

  double best_l2_sparsity = 0.0;
  for (double gamma : {0.01, 0.1, 1.0, 10.0}) {
    DualSolution sol = solve_semidual(a, b, C, RegParams::squared_l2(gamma), opts);
    best_l2_sparsity = std::max(best_l2_sparsity, sol.plan.sparsity());
  }
  bool l2_sparse = best_l2_sparsity >= 0.80;

  ExactSolution exact = solve_exact(a, b, C);
  int max_nnz = a.dim() + b.dim() - 1;
  double exact_sparsity_floor =
      1.0 - static_cast<double>(max_nnz) / (static_cast<double>(a.dim()) * b.dim());
  bool lp_sparse =
      exact.plan.nonzeros() <= max_nnz && exact.plan.sparsity() >= exact_sparsity_floor - 1e-12;

  out.pass = entropy_dense && l2_sparse && lp_sparse;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "entropy zeros = %.0f%%, best l2 zeros = %.0f%%, LP nnz = %d (<= %d, %.0f%%)",
                100.0 * entropy_sol.plan.sparsity(), 100.0 * best_l2_sparsity,
                exact.plan.nonzeros(), max_nnz, 100.0 * exact.plan.sparsity());
  out.detail = buf;
  return out;
}

// 8. Group-lasso-l2 dual solve on a two-group instance with per-column
//    dominated groups: every column carries at least one exactly-zero group,
//    and the recovered columns match a brute-force grid evaluation of the
//    per-group shrinkage problem.
Outcome criterion8() {
  Outcome out;
  const int m = 8, n = 8;
  SplitMix64 rng(816);
  Matrix Cm(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      bool group_one = i < 4;
      bool cheap_for_one = j < 4;
      Cm(i, j) = (group_one == cheap_for_one) ? rng.uniform(0.0, 0.2) : rng.uniform(2.0, 3.0);
    }
  Histogram a = testutil::random_histogram(m, rng);
  std::vector<double> bw = testutil::random_vector(n, rng, 0.2, 1.0);
  double first_block = a[0] + a[1] + a[2] + a[3];
  double s1 = bw[0] + bw[1] + bw[2] + bw[3], s2 = bw[4] + bw[5] + bw[6] + bw[7];
  for (int j = 0; j < 4; ++j) bw[static_cast<size_t>(j)] *= first_block / s1;
  for (int j = 4; j < 8; ++j) bw[static_cast<size_t>(j)] *= (1.0 - first_block) / s2;
  Histogram b = Histogram::normalized(std::move(bw));
  CostMatrix C = CostMatrix::make(std::move(Cm));
  RegParams reg = RegParams::group_lasso_l2(0.3, 0.6, {{0, 1, 2, 3}, {4, 5, 6, 7}});

  SolveOptions opts;
  opts.max_iters = 20000;
  opts.grad_tol = 1e-8;
  DualSolution sol = solve_dual(a, b, C, reg, opts);

  bool every_column_has_zero_group = true;
  double worst_mismatch = 0.0;
  for (int j = 0; j < n; ++j) {
    int zero_groups = 0;
    for (const auto& grp : reg.groups) {
      bool all_zero = true;
      for (int i : grp) all_zero &= (sol.plan.entries(i, j) == 0.0);
      zero_groups += all_zero;

      // Brute-force per-column evaluation of the shrinkage problem.
      std::vector<double> xp(grp.size());
      for (size_t k = 0; k < grp.size(); ++k) {
        double x = sol.potentials.alpha[static_cast<size_t>(grp[k])] +
                   (*sol.potentials.beta)[static_cast<size_t>(j)] - C(grp[k], j);
        xp[k] = std::max(x, 0.0) / reg.gamma;
      }
      std::vector<double> brute = testutil::grid_min_shrink(xp, reg.mu);
      for (size_t k = 0; k < grp.size(); ++k)
        worst_mismatch = std::max(
            worst_mismatch, std::fabs(brute[k] - sol.plan.entries(grp[k], j)));
    }
    every_column_has_zero_group &= (zero_groups >= 1);
  }
  out.pass = sol.report.converged && every_column_has_zero_group && worst_mismatch <= 1e-5;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "zero group in every column = %s, max |plan - brute force| = %.2e",
                every_column_has_zero_group ? "yes" : "no", worst_mismatch);
  out.detail = buf;
  return out;
}

// 9. Tightness: with gamma = 0.1, on instances where min{H(a), H(b)} exceeds
//    min{||a||^2, ||b||^2} / 2, squared_l2 has the smaller regularized value
//    error at least 80% of the time (50 random 8x8 instances).
Outcome criterion9() {
  Outcome out;
  SplitMix64 rng(817);
  SolveOptions opts;
  opts.max_iters = 20000;
  opts.grad_tol = 1e-7;
  const double gamma = 0.1;

  int eligible = 0, l2_tighter = 0;
  for (int rep = 0; rep < 50; ++rep) {
    Instance inst = random_instance(8, 8, rng);
    double ha = entropy_of(inst.a), hb = entropy_of(inst.b);
    double na = 0.0, nb = 0.0;
    for (double w : inst.a.weights()) na += w * w;
    for (double w : inst.b.weights()) nb += w * w;
    if (!(std::min(ha, hb) > 0.5 * std::min(na, nb))) continue;
    ++eligible;

    double ot = solve_exact(inst.a, inst.b, inst.C).value;
    DualSolution ent = solve_semidual(inst.a, inst.b, inst.C, RegParams::entropy(gamma), opts);
    DualSolution sql = solve_semidual(inst.a, inst.b, inst.C, RegParams::squared_l2(gamma), opts);
    double err_ent = std::fabs(ent.report.final_objective - ot);
    double err_sql = std::fabs(sql.report.final_objective - ot);
    if (err_sql < err_ent) ++l2_tighter;
  }
  double fraction = eligible ? static_cast<double>(l2_tighter) / eligible : 0.0;
  out.pass = eligible > 0 && fraction >= 0.80;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d eligible instances, squared_l2 tighter on %.0f%%",
                eligible, 100.0 * fraction);
  out.detail = buf;
  return out;
}

// 10. End-to-end color transfer: 64x64 synthetic images, k = 32, semi-dual
//     squared_l2 at gamma = 1; under 10 s, valid PNG, marginal residuals
//     <= 1e-4, bit-reproducible under a fixed seed.
Outcome criterion10() {
  Outcome out;
  namespace fs = std::filesystem;
  auto t0 = Clock::now();

  Image source = synthetic_image(64, 64, 0);
  Image target = synthetic_image(64, 64, 1);
  TransferOptions opts;
  opts.k = 32;
  opts.seed = 99;
  opts.formulation = Formulation::semidual;
  opts.reg = RegParams::squared_l2(1.0);
  opts.solve.max_iters = 10000;
  opts.solve.grad_tol = 1e-6;

  TransferResult r1 = color_transfer(source, target, opts);
  TransferResult r2 = color_transfer(source, target, opts);
  double secs = seconds_since(t0);

  fs::path dir = fs::temp_directory_path() / "otkit_acceptance";
  fs::create_directories(dir);
  std::string p1 = (dir / "c10_run1.png").string(), p2 = (dir / "c10_run2.png").string();
  write_png(p1, r1.output);
  write_png(p2, r2.output);
  Image reread = read_png(p1);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  fs::remove_all(dir);

  bool png_ok = reread.width == 64 && reread.height == 64 && reread.pixels == r1.output.pixels;
  bool reproducible = b1 == b2 && r1.plan.entries.raw() == r2.plan.entries.raw();
  bool residuals_ok = r1.plan.row_residual <= 1e-4 && r1.plan.col_residual <= 1e-4;
  out.pass = png_ok && reproducible && residuals_ok && secs < 10.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "residuals (row, col) = (%.1e, %.1e), reproducible = %s, %.1f s",
                r1.plan.row_residual, r1.plan.col_residual, reproducible ? "yes" : "no", secs);
  out.detail = buf;
  return out;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"oracle matches brute-force enumeration", criterion1},
      {"regularization-gap sandwich (entropy, squared_l2)", criterion2},
      {"relaxation-gap sandwich (relaxed, semi-relaxed)", criterion3},
      {"analytic gradients vs central differences", criterion4},
      {"alternating minimization reproduces Sinkhorn", criterion5},
      {"dual / semi-dual value agreement", criterion6},
      {"sparsity dichotomy (entropy vs squared_l2 vs LP)", criterion7},
      {"group-lasso produces zero groups, matches brute force", criterion8},
      {"squared_l2 is tighter than entropy at equal gamma", criterion9},
      {"end-to-end color transfer", criterion10},
  };

  int failures = 0;
  int id = 1;
  for (const Entry& e : entries) {
    Outcome o = e.fn();
    std::printf("[%s] criterion %2d: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, e.name,
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
    ++id;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  else std::printf("all %d criteria passed\n", id - 1);
  return failures ? 1 : 0;
}
