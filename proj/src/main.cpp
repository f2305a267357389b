#include "mihs/bench.hpp"
#include "mihs/estimate.hpp"
#include "mihs/mmio.hpp"
#include "mihs/rng.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

using mihs::ExperimentConfig;
using mihs::Index;
using ojson = nlohmann::ordered_json;

// Problem used when no --config is given: small, regularized, 1% noise.
ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.seed = 1;
  cfg.trials = 4;
  cfg.problem.n = 64;
  cfg.problem.d = 16;
  cfg.problem.profile = mihs::SingularProfile::geometric();
  cfg.problem.kappa = 1e3;
  cfg.problem.noise_level = 0.01;
  cfg.problem.lambda = 1e-2;
  return cfg;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
};

ExperimentConfig load_or_default(const CommonOpts& c) {
  ExperimentConfig cfg =
      c.config_path.empty() ? default_config()
                            : mihs::load_experiment_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.lambda) {
    cfg.problem.lambda = *c.lambda;
    cfg.problem.lambda_optimal = false;
  }
  return cfg;
}

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--config", c.config_path, "experiment config (JSON)");
  sub->add_option("--out", c.out_dir, "output directory");
  sub->add_option("--seed", c.seed, "master seed override");
  sub->add_option("--lambda", c.lambda, "regularization override");
}

void print_json(const ojson& j) { std::cout << j.dump(2) << "\n"; }

mihs::SolverSpec pick_solver_spec(const ExperimentConfig& cfg,
                                  const std::string& solver_name) {
  mihs::SolverSpec spec;
  if (!cfg.solvers.empty()) spec = cfg.solvers.front();
  if (!solver_name.empty())
    spec.family = mihs::solver_family_from_string(solver_name);
  return spec;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Momentum Iterative Hessian Sketch solvers and benchmarks"};
  app.require_subcommand(1);
  int exit_code = 0;

  // ---- gen ----------------------------------------------------------------
  auto gen_opts = std::make_shared<CommonOpts>();
  CLI::App* gen = app.add_subcommand("gen", "generate a problem and write Matrix Market files");
  add_common(gen, *gen_opts);
  gen->callback([gen_opts] {
    ExperimentConfig cfg = load_or_default(*gen_opts);
    mihs::Problem p = mihs::build_problem(cfg.problem, cfg.seed);
    const std::string adir = gen_opts->out_dir;
    const std::string af = adir + "/A.mtx", bf = adir + "/b.mtx";
    mihs::write_matrix(af, p.A);
    mihs::write_vector(bf, p.b);
    ojson j;
    j["matrix_file"] = af;
    j["rhs_file"] = bf;
    if (p.x_true) {
      const std::string xf = adir + "/x_true.mtx";
      mihs::write_vector(xf, *p.x_true);
      j["x_true_file"] = xf;
    }
    j["n"] = p.A.rows();
    j["d"] = p.A.cols();
    j["lambda"] = p.lambda;
    j["seed"] = cfg.seed;
    print_json(j);
  });

  // ---- solve --------------------------------------------------------------
  auto solve_opts = std::make_shared<CommonOpts>();
  auto solve_solver = std::make_shared<std::string>();
  auto solve_m = std::make_shared<std::string>();
  auto solve_iters = std::make_shared<Index>(0);
  auto solve_eps = std::make_shared<double>(-1.0);
  auto solve_format = std::make_shared<std::string>("json");
  CLI::App* solve = app.add_subcommand("solve", "run one solver and print a summary");
  add_common(solve, *solve_opts);
  solve->add_option("--solver", *solve_solver, "solver family")
      ->check(CLI::IsMember({"primal", "dual", "pd_under", "pd_over", "baseline_lsqr"}));
  solve->add_option("--m", *solve_m, "sketch rows (integer or \"<mult>sd\")");
  solve->add_option("--iters", *solve_iters, "outer iterations");
  solve->add_option("--eps-sub", *solve_eps, "sub-solver forcing term");
  solve->add_option("--format", *solve_format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  solve->callback([solve_opts, solve_solver, solve_m, solve_iters, solve_eps,
                   solve_format] {
    ExperimentConfig cfg = load_or_default(*solve_opts);
    mihs::Problem p = mihs::build_problem(cfg.problem, cfg.seed);
    mihs::SolverSpec spec = pick_solver_spec(cfg, *solve_solver);
    if (!solve_m->empty()) spec.m = *solve_m;
    if (solve_opts->lambda) {
      spec.lambda = *solve_opts->lambda;
      spec.lambda_optimal = false;
    }
    if (*solve_iters > 0) spec.iters = *solve_iters;
    if (*solve_eps >= 0.0) spec.eps_sub = *solve_eps;
    mihs::ResolvedSolver rs = mihs::resolve_solver(spec, p, 0);
    const mihs::CompactSVD& svd = mihs::ensure_svd(p);
    const mihs::Vector x_ref = mihs::ridge_solution(svd, p.b, rs.cfg.lambda);
    const mihs::SolveReport rep =
        mihs::run_resolved(p, rs, mihs::child_seed(cfg.seed, 1), &x_ref);

    if (*solve_format == "csv") {
      std::cout << mihs::csv_header() << "\n";
      char buf[64];
      for (const auto& rec : rep.records) {
        if (rec.inner != 0) continue;
        std::snprintf(buf, sizeof(buf), "%.17g", rec.rel_error);
        std::cout << 0 << ',' << rec.outer << ',' << rec.cum_flops << ",0," << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", rec.residual);
        std::cout << ',' << buf << ',' << rec.subsolver_iters << "\n";
      }
      return;
    }
    ojson j;
    j["solver"] = to_string(rs.family);
    if (rs.family != mihs::SolverFamily::BaselineLsqr) {
      j["scheme"] = rs.scheme == mihs::Scheme::Exact ? "exact" : "inexact";
      j["sketch"] = to_string(rs.cfg.sketch);
      j["m"] = rs.cfg.m;
    }
    j["lambda"] = rs.cfg.lambda;
    j["sd"] = rs.sd;
    j["iterations"] = rep.records.empty() ? Index{0} : rep.records.back().outer;
    j["final_rel_error"] = rep.records.empty() ? -1.0 : rep.records.back().rel_error;
    const double bn = p.b.norm();
    j["final_residual"] = rep.records.empty() ? 0.0 : rep.records.back().residual;
    j["final_relative_residual"] =
        (rep.records.empty() || bn == 0.0) ? 0.0 : rep.records.back().residual / bn;
    j["total_flops"] = rep.flops.total();
    j["rate_estimate"] = rep.converged_rate_estimate;
    if (rep.aborted) {
      j["aborted"] = true;
      j["abort_reason"] = rep.abort_reason;
    }
    print_json(j);
  });

  // ---- bench --------------------------------------------------------------
  auto bench_opts = std::make_shared<CommonOpts>();
  auto bench_trials = std::make_shared<Index>(0);
  CLI::App* bench = app.add_subcommand("bench", "run a configured experiment");
  add_common(bench, *bench_opts);
  bench->get_option("--config")->required();
  bench->add_option("--trials", *bench_trials, "Monte-Carlo trials override");
  bench->callback([bench_opts, bench_trials] {
    ExperimentConfig cfg = mihs::load_experiment_config(bench_opts->config_path);
    if (bench_opts->seed) cfg.seed = *bench_opts->seed;
    if (bench_opts->lambda) {
      cfg.problem.lambda = *bench_opts->lambda;
      cfg.problem.lambda_optimal = false;
    }
    if (*bench_trials > 0) cfg.trials = *bench_trials;
    if (bench_opts->out_dir != ".") cfg.out_dir = bench_opts->out_dir;
    const mihs::ExperimentResult res = mihs::run_experiment(cfg);
    ojson j;
    j["csv_files"] = res.csv_paths;
    j["summary_file"] = res.summary_path;
    print_json(j);
  });

  // ---- estimate-sd --------------------------------------------------------
  auto est_opts = std::make_shared<CommonOpts>();
  auto est_m = std::make_shared<std::string>();
  auto est_T = std::make_shared<Index>(8);
  auto est_eps = std::make_shared<double>(1e-2);
  CLI::App* est = app.add_subcommand(
      "estimate-sd", "Hutchinson statistical-dimension estimate on a sketched matrix");
  add_common(est, *est_opts);
  est->add_option("--m", *est_m, "sketch rows (integer or \"<mult>sd\")");
  est->add_option("--trials", *est_T, "number of probes T");
  est->add_option("--eps-sub", *est_eps, "probe solve tolerance eps_tr");
  est->callback([est_opts, est_m, est_T, est_eps] {
    ExperimentConfig cfg = load_or_default(*est_opts);
    mihs::Problem p = mihs::build_problem(cfg.problem, cfg.seed);
    const double lambda = p.lambda;
    const Index n = p.A.rows(), d = p.A.cols();
    Index m = std::min(n, 4 * d);
    if (!est_m->empty()) {
      const mihs::CompactSVD& svd = mihs::ensure_svd(p);
      m = mihs::resolve_sketch_rows(*est_m,
                                    mihs::sd_exact(svd.singular_values, lambda));
    }
    mihs::SketchKind kind = cfg.solvers.empty() ? mihs::SketchKind::gaussian()
                                                : cfg.solvers.front().sketch;
    mihs::SketchOperator S =
        mihs::build_sketch(kind, n, m, mihs::child_seed(cfg.seed, 1));
    mihs::Matrix SA = mihs::apply_sketch(S, p.A);
    const mihs::SdEstimate e = mihs::hutchinson_sd(
        SA, lambda, *est_T, *est_eps, mihs::child_seed(cfg.seed, 2));
    ojson j;
    j["value"] = mihs::clamp_sd_for_momentum(e.value, d);
    j["raw"] = e.raw;
    j["samples"] = e.samples;
    j["eps_tr"] = e.eps_tr;
    j["m"] = m;
    j["lambda"] = lambda;
    j["d"] = d;
    print_json(j);
  });

  // ---- sketch -------------------------------------------------------------
  auto sk_opts = std::make_shared<CommonOpts>();
  auto sk_m = std::make_shared<std::string>();
  CLI::App* sk = app.add_subcommand("sketch", "materialize SA to a Matrix Market file");
  add_common(sk, *sk_opts);
  sk->add_option("--m", *sk_m, "sketch rows (integer or \"<mult>sd\")")->required();
  sk->callback([sk_opts, sk_m] {
    ExperimentConfig cfg = load_or_default(*sk_opts);
    mihs::Problem p = mihs::build_problem(cfg.problem, cfg.seed);
    const mihs::CompactSVD& svd = mihs::ensure_svd(p);
    const Index m = mihs::resolve_sketch_rows(
        *sk_m, mihs::sd_exact(svd.singular_values, p.lambda));
    mihs::SketchKind kind = cfg.solvers.empty() ? mihs::SketchKind::gaussian()
                                                : cfg.solvers.front().sketch;
    mihs::SketchOperator S =
        mihs::build_sketch(kind, p.A.rows(), m, mihs::child_seed(cfg.seed, 1));
    mihs::Matrix SA = mihs::apply_sketch(S, p.A);
    const std::string path = sk_opts->out_dir + "/SA.mtx";
    mihs::write_matrix(path, SA);
    ojson j;
    j["file"] = path;
    j["kind"] = to_string(kind);
    j["m"] = m;
    j["cols"] = SA.cols();
    print_json(j);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e); // prints the usage message
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
