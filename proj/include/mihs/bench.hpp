#pragma once

#include "mihs/problems.hpp"
#include "mihs/solvers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mihs {

enum class SolverFamily { Primal, Dual, PdUnder, PdOver, BaselineLsqr };

std::string to_string(SolverFamily family);
SolverFamily solver_family_from_string(const std::string& name);

// One solver cell of an experiment, as configured (sizes may still be
// symbolic: "m": "2sd" resolves against the problem's statistical dimension).
struct SolverSpec {
  std::string name;  // output stem; defaulted to "<family>_<index>" if empty
  SolverFamily family = SolverFamily::Primal;
  Scheme scheme = Scheme::Inexact;
  SketchKind sketch = SketchKind::gaussian();
  std::string m;   // "512" or "<mult>sd" (e.g. "2sd"); empty = identity sketch
  std::string m2;  // second level (primal-dual)
  std::optional<double> lambda;  // overrides the problem lambda
  bool lambda_optimal = false;
  Index iters = 30;
  Index inner_iters = 25;
  double eps_sub = 0.1;
  MomentumRule rule = MomentumRule::Empirical;
  MomentumParams momentum;          // Fixed rule
  double rule_eps = 0.5;            // Theoretical rule
  std::optional<double> sd_override; // else sd_exact from the problem's SVD
  Index max_iter = 500;             // baseline_lsqr
  double tol = 1e-12;               // baseline_lsqr
};

// Problem block: generated (n, d, profile, ...) or loaded from files.
struct ProblemSpec {
  Index n = 0, d = 0;
  SingularProfile profile = SingularProfile::geometric();
  double kappa = 1.0;
  double noise_level = 0.0;
  XTrueKind x_kind = XTrueKind::Smooth;
  double lambda = 0.0;
  bool lambda_optimal = false;
  std::string matrix_file, rhs_file, x_true_file; // file-based alternative
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  Index trials = 32;
  bool record_wall_time = false; // false => wall_time_s column written as 0
  std::string out_dir = ".";
  ProblemSpec problem;
  std::vector<SolverSpec> solvers;
};

// JSON schema documented in README.md. Throws std::runtime_error with a
// field path on invalid input.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Generate or load the problem and resolve its lambda ("optimal" included).
Problem build_problem(const ProblemSpec& spec, std::uint64_t seed);

// "512" -> 512; "2sd"/"2.5sd" -> ceil(mult * sd); "" -> 0 (identity).
Index resolve_sketch_rows(const std::string& spec, double sd);

// Solver spec with all symbolic parameters resolved against a problem.
struct ResolvedSolver {
  std::string name;
  SolverFamily family = SolverFamily::Primal;
  Scheme scheme = Scheme::Inexact;
  SolverConfig cfg;              // lambda, m, m2, rule_* filled in
  double sd = 0.0;               // statistical dimension used for sizing
  double theoretical_rate = 0.0; // sqrt(beta) / eps-rate; 0 when n/a (baseline)
  Index max_iter = 500;          // baseline_lsqr
  double tol = 1e-12;
};

// May compute (and cache) the problem's SVD / optimal lambda.
ResolvedSolver resolve_solver(const SolverSpec& spec, Problem& problem,
                              int index);

// One trial; trial_seed replaces cfg.seed. x_reference feeds rel_error.
SolveReport run_resolved(const Problem& problem, const ResolvedSolver& rs,
                         std::uint64_t trial_seed, const Vector* x_reference);

inline const char* csv_header() {
  return "trial,iteration,cumulative_flops,wall_time_s,rel_error_to_reference,"
         "residual,subsolver_iters";
}

struct ExperimentResult {
  std::vector<std::string> csv_paths;
  std::string summary_path;
  std::string summary_json;
};

// Runs every (solver, trial) cell sequentially and deterministically:
// the problem comes from cfg.seed, trial t of solver i uses
// child_seed(child_seed(cfg.seed, i + 1), t). Writes <name>.csv per solver
// (outer-iteration rows only) plus summary.json into cfg.out_dir; output
// files are opened before any compute so unwritable paths fail early.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

} // namespace mihs
