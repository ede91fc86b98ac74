// Command-line frontend: solve regularized OT instances from CSV files, run
// the exact oracle, compute approximation-error bounds, sweep gamma grids and
// run color transfer between PNG images.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "otkit/bounds.hpp"
#include "otkit/colortransfer.hpp"
#include "otkit/core.hpp"
#include "otkit/image.hpp"
#include "otkit/io.hpp"
#include "otkit/oracle.hpp"
#include "otkit/regularizers.hpp"
#include "otkit/solvers.hpp"

using json = nlohmann::ordered_json;
using namespace otkit;

namespace {

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0   success\n"
    "  1   command-line usage error\n"
    "  2   dimension mismatch\n"
    "  3   non-positive mass in a histogram\n"
    "  4   histogram not normalized\n"
    "  5   negative cost entry\n"
    "  6   non-finite input\n"
    "  7   unsupported regularizer for the chosen formulation\n"
    "  8   invalid group structure\n"
    "  9   instance exceeds the exact-oracle size limit\n"
    "  10  zero reference value in an error metric\n"
    "  11  too few distinct colors for the requested k\n"
    "  12  file I/O error\n"
    "  13  invalid argument\n";

struct CommonFlags {
  std::string a_path, b_path, cost_path;
  std::string formulation = "semidual";
  std::string reg = "l2";
  double gamma = 1.0;
  double mu = 0.0;
  std::string groups_path;
  std::string solver = "auto";
  int max_iters = 1000;
  double grad_tol = 1e-6;
  bool trace = false;
};

Formulation parse_formulation(const std::string& s) {
  if (s == "dual") return Formulation::dual;
  if (s == "semidual") return Formulation::semidual;
  if (s == "relaxed") return Formulation::relaxed;
  if (s == "semirelaxed") return Formulation::semirelaxed;
  throw OtError(Errc::invalid_argument, "unknown formulation: " + s);
}

Solver parse_solver(const std::string& s) {
  if (s == "auto") return Solver::auto_select;
  if (s == "lbfgs" || s == "quasi_newton") return Solver::quasi_newton;
  if (s == "gd" || s == "gradient_descent") return Solver::gradient_descent;
  if (s == "alternating") return Solver::alternating;
  if (s == "apg" || s == "fista") return Solver::accelerated_projected_gradient;
  throw OtError(Errc::invalid_argument, "unknown solver: " + s);
}

RegParams parse_reg(const CommonFlags& flags) {
  std::vector<std::vector<int>> groups;
  if (flags.reg == "gl-entropy" || flags.reg == "gl-l2") {
    if (flags.groups_path.empty())
      throw OtError(Errc::invalid_groups, "group-lasso regularizers need --groups");
    groups = read_groups(flags.groups_path);
  }
  if (flags.reg == "entropy") return RegParams::entropy(flags.gamma);
  if (flags.reg == "l2" || flags.reg == "squared_l2") return RegParams::squared_l2(flags.gamma);
  if (flags.reg == "gl-entropy")
    return RegParams::group_lasso_entropy(flags.gamma, flags.mu, std::move(groups));
  if (flags.reg == "gl-l2")
    return RegParams::group_lasso_l2(flags.gamma, flags.mu, std::move(groups));
  throw OtError(Errc::invalid_argument, "unknown regularizer: " + flags.reg);
}

SolveOptions parse_solve_options(const CommonFlags& flags) {
  SolveOptions opts;
  opts.max_iters = flags.max_iters;
  opts.grad_tol = flags.grad_tol;
  opts.solver = parse_solver(flags.solver);
  opts.record_trace = flags.trace;
  return opts;
}

struct Instance {
  Histogram a;
  Histogram b;
  CostMatrix C;
};

Instance load_instance(const CommonFlags& flags) {
  Histogram a = Histogram::make(read_vector_csv(flags.a_path));
  Histogram b = Histogram::make(read_vector_csv(flags.b_path));
  CostMatrix C = CostMatrix::make(read_matrix_csv(flags.cost_path));
  validate_instance(a, b, C);
  return Instance{std::move(a), std::move(b), std::move(C)};
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_instance) {
  if (with_instance) {
    cmd->add_option("--a", flags.a_path, "source histogram CSV (one value per line)")->required();
    cmd->add_option("--b", flags.b_path, "target histogram CSV")->required();
    cmd->add_option("--cost", flags.cost_path, "cost matrix CSV (comma-separated rows)")
        ->required();
  }
  cmd->add_option("--formulation", flags.formulation, "dual|semidual|relaxed|semirelaxed");
  cmd->add_option("--reg", flags.reg, "entropy|l2|gl-entropy|gl-l2");
  cmd->add_option("--gamma", flags.gamma, "regularization / relaxation strength (> 0)");
  cmd->add_option("--mu", flags.mu, "group-lasso weight (>= 0)");
  cmd->add_option("--groups", flags.groups_path,
                  "group file: one line per group, space-separated row indices");
  cmd->add_option("--solver", flags.solver, "auto|lbfgs|gd|alternating|apg");
  cmd->add_option("--max-iters", flags.max_iters, "iteration cap");
  cmd->add_option("--grad-tol", flags.grad_tol, "gradient / residual tolerance");
  cmd->add_flag("--trace", flags.trace, "record the objective trace in the report");
}

json report_json(const SolveReport& report, const TransportPlan& plan,
                 const CommonFlags& flags) {
  json j;
  j["formulation"] = flags.formulation;
  j["reg"] = flags.reg;
  j["gamma"] = flags.gamma;
  j["mu"] = flags.mu;
  j["solver"] = flags.solver;
  j["iterations"] = report.iters;
  j["converged"] = report.converged;
  j["final_objective"] = report.final_objective;
  if (report.duality_gap) {
    j["duality_gap"] = *report.duality_gap;
    j["gap_from_rounded_plan"] = report.gap_from_rounded_plan;
  }
  j["plan_sparsity"] = report.plan_sparsity;
  j["marginal_residuals"] = {{"row", plan.row_residual}, {"col", plan.col_residual}};
  j["wall_time_sec"] = report.wall_time;
  j["clamp_events"] = report.clamp_events;
  if (!report.objective_trace.empty()) j["objective_trace"] = report.objective_trace;
  return j;
}

json bounds_json(const Instance& inst, const std::string& reg) {
  json j;
  if (reg == "entropy" || reg == "l2" || reg == "squared_l2") {
    RegKind kind = reg == "entropy" ? RegKind::entropy : RegKind::squared_l2;
    BoundReport report = bound_report(inst.a, inst.b, inst.C, kind);
    j["L"] = report.L;
    j["U"] = report.U;
    j["L_relaxed"] = report.L_relaxed;
    j["L_semi_relaxed"] = report.L_semi_relaxed;
    j["nu1"] = report.nu1;
    j["nu2"] = report.nu2;
    return j;
  }
  RelaxationGapBounds t2 = relaxation_gap_bounds(inst.a, inst.b, inst.C);
  j["L_relaxed"] = t2.L;
  j["L_semi_relaxed"] = t2.L_tilde;
  j["nu1"] = t2.nu1;
  j["nu2"] = t2.nu2;
  return j;
}

json exact_metrics_json(const Instance& inst, const TransportPlan& plan, double reg_value,
                        const ExactSolution& exact) {
  ValueErrors errs = value_errors(plan, reg_value, exact, inst.a, inst.b, inst.C);
  json j;
  j["value"] = exact.value;
  if (errs.value_error) j["value_error"] = *errs.value_error;
  j["reg_value_error"] = errs.reg_value_error;
  j["marginal_error"] = errs.marginal_error;
  j["plan_error"] = plan_error(plan, exact.plan);
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw OtError(Errc::io_error, "cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw OtError(Errc::io_error, "write failed: " + path);
}

struct SolveOutcome {
  TransportPlan plan;
  SolveReport report;
};

SolveOutcome run_formulation(const Instance& inst, const CommonFlags& flags) {
  Formulation f = parse_formulation(flags.formulation);
  SolveOptions opts = parse_solve_options(flags);
  switch (f) {
    case Formulation::dual: {
      DualSolution s = solve_dual(inst.a, inst.b, inst.C, parse_reg(flags), opts);
      return SolveOutcome{std::move(s.plan), std::move(s.report)};
    }
    case Formulation::semidual: {
      DualSolution s = solve_semidual(inst.a, inst.b, inst.C, parse_reg(flags), opts);
      return SolveOutcome{std::move(s.plan), std::move(s.report)};
    }
    case Formulation::relaxed: {
      if (flags.reg == "gl-entropy" || flags.reg == "gl-l2")
        throw OtError(Errc::unsupported_regularizer, "group lasso applies to the dual only");
      PrimalSolution s =
          solve_relaxed_primal(inst.a, inst.b, inst.C, RelaxationParams{flags.gamma}, opts);
      return SolveOutcome{std::move(s.plan), std::move(s.report)};
    }
    case Formulation::semirelaxed: {
      if (flags.reg == "gl-entropy" || flags.reg == "gl-l2")
        throw OtError(Errc::unsupported_regularizer, "group lasso applies to the dual only");
      PrimalSolution s =
          solve_semi_relaxed_primal(inst.a, inst.b, inst.C, RelaxationParams{flags.gamma}, opts);
      return SolveOutcome{std::move(s.plan), std::move(s.report)};
    }
  }
  throw OtError(Errc::invalid_argument, "unreachable formulation");
}

int cmd_solve(const CommonFlags& flags, const std::string& out_path,
              const std::string& report_path, bool with_exact) {
  Instance inst = load_instance(flags);
  SolveOutcome outcome = run_formulation(inst, flags);

  if (!out_path.empty()) write_matrix_csv(out_path, outcome.plan.entries);
  if (!report_path.empty()) {
    json j = report_json(outcome.report, outcome.plan, flags);
    if (with_exact) {
      ExactSolution exact = solve_exact(inst.a, inst.b, inst.C);
      j["exact"] = exact_metrics_json(inst, outcome.plan, outcome.report.final_objective, exact);
      j["bounds"] = bounds_json(inst, flags.reg);
    }
    write_json(report_path, j);
  }
  std::printf("solve: value=%.12g iters=%d converged=%d sparsity=%.4f\n",
              outcome.report.final_objective, outcome.report.iters,
              outcome.report.converged ? 1 : 0, outcome.report.plan_sparsity);
  return 0;
}

int cmd_exact(const CommonFlags& flags, const std::string& out_path,
              const std::string& report_path) {
  Instance inst = load_instance(flags);
  ExactSolution exact = solve_exact(inst.a, inst.b, inst.C);
  if (!out_path.empty()) write_matrix_csv(out_path, exact.plan.entries);
  if (!report_path.empty()) {
    json j;
    j["value"] = exact.value;
    j["nonzeros"] = exact.plan.nonzeros();
    j["plan_sparsity"] = exact.plan.sparsity();
    j["marginal_residuals"] = {{"row", exact.plan.row_residual},
                               {"col", exact.plan.col_residual}};
    j["dual"] = {{"alpha", exact.dual.alpha}, {"beta", *exact.dual.beta}};
    write_json(report_path, j);
  }
  std::printf("exact: value=%.12g nonzeros=%d\n", exact.value, exact.plan.nonzeros());
  return 0;
}

int cmd_bounds(const CommonFlags& flags, const std::string& report_path) {
  Instance inst = load_instance(flags);
  RegularizationGapBounds ent = regularization_gap_bounds(inst.a, inst.b, RegKind::entropy);
  RegularizationGapBounds sql = regularization_gap_bounds(inst.a, inst.b, RegKind::squared_l2);
  RelaxationGapBounds t2 = relaxation_gap_bounds(inst.a, inst.b, inst.C);
  json j;
  j["regularization_gap"] = {{"entropy", {{"L", ent.L}, {"U", ent.U}}},
                              {"squared_l2", {{"L", sql.L}, {"U", sql.U}}}};
  j["relaxation_gap"] = {{"L", t2.L}, {"L_tilde", t2.L_tilde}, {"nu1", t2.nu1}, {"nu2", t2.nu2}};
  if (!report_path.empty()) write_json(report_path, j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_compare(const CommonFlags& flags, const std::string& gammas_csv,
                const std::string& report_path) {
  Instance inst = load_instance(flags);
  ExactSolution exact = solve_exact(inst.a, inst.b, inst.C);

  std::vector<double> gammas;
  std::stringstream ss(gammas_csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      gammas.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw OtError(Errc::invalid_argument, "bad gamma value '" + token + "'");
    }
  }
  if (gammas.empty()) throw OtError(Errc::invalid_argument, "--gammas list is empty");

  json rows = json::array();
  for (double g : gammas) {
    CommonFlags per_gamma = flags;
    per_gamma.gamma = g;
    SolveOutcome outcome = run_formulation(inst, per_gamma);
    ValueErrors errs =
        value_errors(outcome.plan, outcome.report.final_objective, exact, inst.a, inst.b, inst.C);
    json row;
    row["gamma"] = g;
    if (errs.value_error) row["value_error"] = *errs.value_error;
    row["reg_value_error"] = errs.reg_value_error;
    row["marginal_error"] = errs.marginal_error;
    row["plan_error"] = plan_error(outcome.plan, exact.plan);
    row["plan_sparsity"] = outcome.report.plan_sparsity;
    row["final_objective"] = outcome.report.final_objective;
    row["iterations"] = outcome.report.iters;
    row["converged"] = outcome.report.converged;
    rows.push_back(std::move(row));
  }

  json j;
  j["formulation"] = flags.formulation;
  j["reg"] = flags.reg;
  j["exact_value"] = exact.value;
  j["rows"] = std::move(rows);
  if (!report_path.empty()) write_json(report_path, j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_transfer(const CommonFlags& flags, const std::string& source_path,
                 const std::string& target_path, const std::string& out_path, int k,
                 std::uint64_t seed, const std::string& direction,
                 const std::string& report_path, const std::string& plan_path) {
  if (direction != "forward" && direction != "reverse")
    throw OtError(Errc::invalid_argument, "--direction must be forward or reverse");
  Image source = read_png(source_path);
  Image target = read_png(target_path);
  if (direction == "reverse") std::swap(source, target);

  TransferOptions opts;
  opts.k = k;
  opts.seed = seed;
  opts.formulation = parse_formulation(flags.formulation);
  opts.reg = parse_reg(flags);
  opts.rel = RelaxationParams{flags.gamma};
  opts.solve = parse_solve_options(flags);

  TransferResult result = color_transfer(source, target, opts);
  write_png(out_path, result.output);
  if (!plan_path.empty()) write_matrix_csv(plan_path, result.plan.entries);
  if (!report_path.empty()) {
    json j = report_json(result.report, result.plan, flags);
    j["k"] = k;
    j["seed"] = seed;
    j["direction"] = direction;
    j["empty_rows"] = result.empty_rows;
    write_json(report_path, j);
  }
  std::printf("transfer: wrote %s (k=%d, sparsity=%.4f, empty_rows=%zu)\n", out_path.c_str(), k,
              result.report.plan_sparsity, result.empty_rows.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"otkit - smooth and sparse regularized optimal transport toolkit"};
  app.require_subcommand(1);
  app.footer(kExitCodeHelp);

  CommonFlags flags;
  std::string out_path, report_path, gammas_csv = "0.001,0.01,0.1,1,10";
  std::string source_path, target_path, direction = "forward", plan_path;
  int k = 32;
  std::uint64_t seed = 0;
  bool with_exact = false;

  CLI::App* solve = app.add_subcommand("solve", "solve a regularized formulation from CSV files");
  add_common_flags(solve, flags, true);
  solve->add_option("--out", out_path, "write the transport plan CSV here");
  solve->add_option("--report", report_path, "write the JSON report here");
  solve->add_flag("--exact", with_exact, "also run the exact oracle and report error metrics");

  CLI::App* exact = app.add_subcommand("exact", "exact unregularized OT via network simplex");
  exact->add_option("--a", flags.a_path, "source histogram CSV")->required();
  exact->add_option("--b", flags.b_path, "target histogram CSV")->required();
  exact->add_option("--cost", flags.cost_path, "cost matrix CSV")->required();
  exact->add_option("--out", out_path, "write the optimal plan CSV here");
  exact->add_option("--report", report_path, "write the JSON report here");

  CLI::App* bounds = app.add_subcommand("bounds", "approximation-error constants");
  bounds->add_option("--a", flags.a_path, "source histogram CSV")->required();
  bounds->add_option("--b", flags.b_path, "target histogram CSV")->required();
  bounds->add_option("--cost", flags.cost_path, "cost matrix CSV")->required();
  bounds->add_option("--report", report_path, "write the JSON report here");

  CLI::App* compare = app.add_subcommand("compare", "gamma sweep with oracle error metrics");
  add_common_flags(compare, flags, true);
  compare->add_option("--gammas", gammas_csv, "comma-separated gamma grid");
  compare->add_option("--report", report_path, "write the JSON report here");

  CLI::App* transfer = app.add_subcommand("transfer", "color transfer between two PNG images");
  transfer->add_option("--source", source_path, "source image (recolored)")->required();
  transfer->add_option("--target", target_path, "target image (color donor)")->required();
  transfer->add_option("--out", out_path, "output PNG path")->required();
  transfer->add_option("-k,--colors", k, "palette size for k-means quantization");
  transfer->add_option("--seed", seed, "k-means seed (fixed seed = reproducible run)");
  transfer->add_option("--direction", direction, "forward|reverse");
  transfer->add_option("--plan", plan_path, "write the palette transport plan CSV here");
  transfer->add_option("--report", report_path, "write the JSON report here");
  add_common_flags(transfer, flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(flags, out_path, report_path, with_exact);
    if (exact->parsed()) return cmd_exact(flags, out_path, report_path);
    if (bounds->parsed()) return cmd_bounds(flags, report_path);
    if (compare->parsed()) return cmd_compare(flags, gammas_csv, report_path);
    if (transfer->parsed())
      return cmd_transfer(flags, source_path, target_path, out_path, k, seed, direction,
                          report_path, plan_path);
  } catch (const OtError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
