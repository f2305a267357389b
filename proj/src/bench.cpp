#include "mihs/bench.hpp"

#include "mihs/estimate.hpp"
#include "mihs/mmio.hpp"
#include "mihs/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mihs {

namespace {

using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void cfg_fail(const std::string& where, const std::string& msg) {
  throw std::runtime_error("config: " + where + ": " + msg);
}

std::string size_field(const njson& j, const char* key) {
  if (!j.contains(key)) return "";
  const njson& v = j.at(key);
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return std::to_string(std::llround(v.get<double>()));
  if (v.is_string()) return v.get<std::string>();
  cfg_fail(key, "expected integer or string");
}

// lambda-style fields accept a number or the string "optimal".
void lambda_field(const njson& j, const char* key, std::optional<double>& out,
                  bool& optimal) {
  if (!j.contains(key)) return;
  const njson& v = j.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() != "optimal")
      cfg_fail(key, "expected a number or \"optimal\"");
    optimal = true;
    return;
  }
  if (!v.is_number()) cfg_fail(key, "expected a number or \"optimal\"");
  out = v.get<double>();
}

SketchKind parse_sketch_kind(const njson& j, const std::string& where) {
  const std::string s = j.value("sketch", std::string("gaussian"));
  if (s == "gaussian") return SketchKind::gaussian();
  if (s == "count_sketch") return SketchKind::count_sketch();
  if (s == "srht") return SketchKind::srht();
  if (s == "osnap")
    return SketchKind::osnap(j.value("osnap_s", Index{2}));
  cfg_fail(where, "unknown sketch '" + s + "'");
}

SolverSpec parse_solver(const njson& j, int index) {
  const std::string where = "solvers[" + std::to_string(index) + "]";
  if (!j.is_object()) cfg_fail(where, "expected an object");
  SolverSpec s;
  s.name = j.value("name", std::string());
  s.family = solver_family_from_string(j.value("solver", std::string("primal")));
  const std::string scheme = j.value("scheme", std::string("inexact"));
  if (scheme == "exact")
    s.scheme = Scheme::Exact;
  else if (scheme == "inexact")
    s.scheme = Scheme::Inexact;
  else
    cfg_fail(where, "unknown scheme '" + scheme + "'");
  s.sketch = parse_sketch_kind(j, where);
  s.m = size_field(j, "m");
  s.m2 = size_field(j, "m2");
  std::optional<double> lam;
  lambda_field(j, "lambda", lam, s.lambda_optimal);
  s.lambda = lam;
  s.iters = j.value("iters", Index{30});
  s.inner_iters = j.value("inner_iters", Index{25});
  s.eps_sub = j.value("eps_sub", 0.1);
  if (j.contains("momentum")) {
    const njson& m = j.at("momentum");
    if (m.is_string()) {
      const std::string r = m.get<std::string>();
      if (r == "empirical")
        s.rule = MomentumRule::Empirical;
      else if (r == "theoretical")
        s.rule = MomentumRule::Theoretical;
      else
        cfg_fail(where, "unknown momentum rule '" + r + "'");
    } else if (m.is_object()) {
      s.rule = MomentumRule::Fixed;
      s.momentum.alpha = m.value("alpha", 1.0);
      s.momentum.beta = m.value("beta", 0.0);
    } else {
      cfg_fail(where, "momentum: expected rule name or {alpha, beta}");
    }
  }
  s.rule_eps = j.value("rule_eps", 0.5);
  if (j.contains("sd")) s.sd_override = j.at("sd").get<double>();
  s.max_iter = j.value("max_iter", Index{500});
  s.tol = j.value("tol", 1e-12);
  return s;
}

ProblemSpec parse_problem(const njson& j) {
  if (!j.is_object()) cfg_fail("problem", "expected an object");
  ProblemSpec p;
  p.matrix_file = j.value("matrix_file", std::string());
  p.rhs_file = j.value("rhs_file", std::string());
  p.x_true_file = j.value("x_true_file", std::string());
  p.n = j.value("n", Index{0});
  p.d = j.value("d", Index{0});
  if (j.contains("singular_values")) {
    p.profile =
        SingularProfile::from_file(j.at("singular_values").get<std::vector<double>>());
  } else {
    const std::string prof = j.value("profile", std::string("geometric"));
    if (prof == "geometric")
      p.profile = SingularProfile::geometric();
    else if (prof == "philips")
      p.profile = SingularProfile::philips();
    else if (prof == "heat")
      p.profile = SingularProfile::heat();
    else
      cfg_fail("problem", "unknown profile '" + prof + "'");
  }
  p.kappa = j.value("kappa", 1.0);
  p.noise_level = j.value("noise_level", 0.0);
  const std::string xk = j.value("x_true", std::string("smooth"));
  if (xk == "smooth")
    p.x_kind = XTrueKind::Smooth;
  else if (xk == "uniform")
    p.x_kind = XTrueKind::Uniform;
  else
    cfg_fail("problem", "unknown x_true kind '" + xk + "'");
  std::optional<double> lam;
  lambda_field(j, "lambda", lam, p.lambda_optimal);
  if (lam) p.lambda = *lam;
  return p;
}

void fmt17(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

double lower_median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::infinity();
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

} // namespace

std::string to_string(SolverFamily family) {
  switch (family) {
    case SolverFamily::Primal: return "primal";
    case SolverFamily::Dual: return "dual";
    case SolverFamily::PdUnder: return "pd_under";
    case SolverFamily::PdOver: return "pd_over";
    case SolverFamily::BaselineLsqr: return "baseline_lsqr";
  }
  return "unknown";
}

SolverFamily solver_family_from_string(const std::string& name) {
  if (name == "primal") return SolverFamily::Primal;
  if (name == "dual") return SolverFamily::Dual;
  if (name == "pd_under") return SolverFamily::PdUnder;
  if (name == "pd_over") return SolverFamily::PdOver;
  if (name == "baseline_lsqr") return SolverFamily::BaselineLsqr;
  throw std::runtime_error("unknown solver '" + name +
                           "' (expected primal, dual, pd_under, pd_over, or "
                           "baseline_lsqr)");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  njson j;
  try {
    j = njson::parse(json_text);
  } catch (const njson::parse_error& e) {
    throw std::runtime_error(std::string("config: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config: top level must be an object");

  ExperimentConfig cfg;
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.trials = j.value("trials", Index{32});
  if (cfg.trials < 1) cfg_fail("trials", "must be >= 1");
  cfg.record_wall_time = j.value("record_wall_time", false);
  cfg.out_dir = j.value("out_dir", std::string("."));
  if (!j.contains("problem")) cfg_fail("problem", "missing");
  cfg.problem = parse_problem(j.at("problem"));
  if (!j.contains("solvers") || !j.at("solvers").is_array() ||
      j.at("solvers").empty())
    cfg_fail("solvers", "need a non-empty array");
  int idx = 0;
  for (const auto& js : j.at("solvers")) cfg.solvers.push_back(parse_solver(js, idx++));
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

Problem build_problem(const ProblemSpec& spec, std::uint64_t seed) {
  Problem p;
  if (!spec.matrix_file.empty()) {
    p.A = read_matrix(spec.matrix_file);
    if (spec.rhs_file.empty())
      throw std::runtime_error("problem: rhs_file is required with matrix_file");
    p.b = read_vector(spec.rhs_file);
    if (p.b.size() != p.A.rows())
      throw std::runtime_error("problem: rhs length does not match matrix rows");
    if (!spec.x_true_file.empty()) {
      Vector xt = read_vector(spec.x_true_file);
      if (xt.size() != p.A.cols())
        throw std::runtime_error("problem: x_true length does not match matrix cols");
      p.x_true = std::move(xt);
    }
    p.meta.profile = "from_file";
    p.meta.seed = seed;
  } else {
    if (spec.n < 1 || spec.d < 1)
      throw std::runtime_error("problem: need n >= 1 and d >= 1 (or matrix_file)");
    p = generate_problem(spec.n, spec.d, spec.profile, spec.kappa,
                         spec.noise_level, seed, spec.x_kind);
  }
  p.lambda = spec.lambda_optimal ? optimal_lambda(p) : spec.lambda;
  return p;
}

Index resolve_sketch_rows(const std::string& spec, double sd) {
  const std::string s = trim(spec);
  if (s.empty()) return 0;
  try {
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "sd") == 0) {
      const std::string pre = s.substr(0, s.size() - 2);
      double mult = 1.0;
      if (!pre.empty()) {
        std::size_t pos = 0;
        mult = std::stod(pre, &pos);
        if (pos != pre.size()) throw std::invalid_argument(pre);
      }
      if (!(mult > 0.0)) throw std::invalid_argument(s);
      if (!(sd > 0.0))
        throw std::runtime_error("sketch size '" + s +
                                 "' needs a positive statistical dimension");
      const double v = std::ceil(mult * sd);
      return v < 1.0 ? Index{1} : static_cast<Index>(v);
    }
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return static_cast<Index>(v);
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("invalid sketch size '" + spec +
                             "' (expected an integer or \"<mult>sd\")");
  } catch (const std::out_of_range&) {
    throw std::runtime_error("sketch size '" + spec + "' out of range");
  }
}

ResolvedSolver resolve_solver(const SolverSpec& spec, Problem& problem, int index) {
  ResolvedSolver rs;
  rs.name = spec.name.empty()
                ? to_string(spec.family) + "_" + std::to_string(index)
                : spec.name;
  rs.family = spec.family;
  rs.scheme = spec.scheme;
  rs.max_iter = spec.max_iter;
  rs.tol = spec.tol;

  SolverConfig& c = rs.cfg;
  c.sketch = spec.sketch;
  double lam = problem.lambda;
  if (spec.lambda_optimal)
    lam = optimal_lambda(problem);
  else if (spec.lambda)
    lam = *spec.lambda;
  c.lambda = lam;

  const CompactSVD& svd = ensure_svd(problem);
  rs.sd = spec.sd_override ? *spec.sd_override
                           : sd_exact(svd.singular_values, lam);
  c.m = resolve_sketch_rows(spec.m, rs.sd);
  c.m2 = resolve_sketch_rows(spec.m2, rs.sd);
  c.outer_iters = spec.iters;
  c.inner_iters = spec.inner_iters;
  c.eps_sub = spec.eps_sub;
  c.rule = spec.rule;
  c.momentum = spec.momentum;
  c.rule_eps = spec.rule_eps;
  c.rule_sd = clamp_sd_for_momentum(rs.sd, svd.singular_values.size());

  const Index n = problem.A.rows(), d = problem.A.cols();
  const Index m_eff =
      c.m > 0 ? c.m
              : (rs.family == SolverFamily::Primal || rs.family == SolverFamily::PdOver
                     ? n
                     : d);
  switch (rs.family == SolverFamily::BaselineLsqr ? MomentumRule::Fixed : c.rule) {
    case MomentumRule::Empirical:
      if (c.rule_sd < static_cast<double>(m_eff))
        rs.theoretical_rate = std::sqrt(c.rule_sd / static_cast<double>(m_eff));
      break;
    case MomentumRule::Theoretical:
      rs.theoretical_rate =
          c.rule_eps / (1.0 + std::sqrt(1.0 - c.rule_eps * c.rule_eps));
      break;
    case MomentumRule::Fixed:
      rs.theoretical_rate = rs.family == SolverFamily::BaselineLsqr
                                ? 0.0
                                : std::sqrt(c.momentum.beta);
      break;
  }
  return rs;
}

SolveReport run_resolved(const Problem& problem, const ResolvedSolver& rs,
                         std::uint64_t trial_seed, const Vector* x_reference) {
  SolverConfig c = rs.cfg;
  c.seed = trial_seed;
  switch (rs.family) {
    case SolverFamily::Primal:
      return m_ihs(problem, c, rs.scheme, x_reference);
    case SolverFamily::Dual:
      return dual_m_ihs(problem, c, rs.scheme, x_reference);
    case SolverFamily::PdUnder:
      return pd_m_ihs_under(problem, c, x_reference);
    case SolverFamily::PdOver:
      return pd_m_ihs_over(problem, c, x_reference);
    case SolverFamily::BaselineLsqr:
      if (c.lambda != problem.lambda) {
        Problem p2 = problem; // baseline reads lambda off the problem
        p2.lambda = c.lambda;
        return baseline_lsqr(p2, rs.max_iter, rs.tol, x_reference);
      }
      return baseline_lsqr(problem, rs.max_iter, rs.tol, x_reference);
  }
  throw std::logic_error("unknown solver family");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw std::runtime_error("config: trials must be >= 1");
  if (cfg.solvers.empty())
    throw std::runtime_error("config: need at least one solver");

  Problem problem = build_problem(cfg.problem, cfg.seed);

  std::vector<ResolvedSolver> solvers;
  solvers.reserve(cfg.solvers.size());
  for (std::size_t i = 0; i < cfg.solvers.size(); ++i)
    solvers.push_back(resolve_solver(cfg.solvers[i], problem, static_cast<int>(i)));

  // Open every output before any compute so bad paths fail fast.
  ExperimentResult result;
  std::vector<std::ofstream> csvs;
  for (const auto& rs : solvers) {
    const std::string path = cfg.out_dir + "/" + rs.name + ".csv";
    csvs.emplace_back(path, std::ios::binary);
    if (!csvs.back())
      throw std::runtime_error("cannot open output file " + path);
    result.csv_paths.push_back(path);
  }
  result.summary_path = cfg.out_dir + "/summary.json";
  std::ofstream summary_file(result.summary_path, std::ios::binary);
  if (!summary_file)
    throw std::runtime_error("cannot open output file " + result.summary_path);

  const CompactSVD& svd = ensure_svd(problem);
  const std::vector<std::pair<std::string, double>> etas = {
      {"1e-02", 1e-2}, {"1e-04", 1e-4}, {"1e-06", 1e-6}, {"1e-08", 1e-8}};

  ojson jsolvers = ojson::array();
  for (std::size_t si = 0; si < solvers.size(); ++si) {
    const ResolvedSolver& rs = solvers[si];
    const Vector x_ref = ridge_solution(svd, problem.b, rs.cfg.lambda);
    std::ofstream& out = csvs[si];
    std::string block;
    block += csv_header();
    block += '\n';

    std::vector<double> rates;
    std::vector<std::vector<double>> eta_flops(etas.size());
    std::vector<Index> aborted_trials;
    std::vector<std::string> abort_reasons;
    const std::uint64_t solver_base =
        child_seed(cfg.seed, static_cast<std::uint64_t>(si) + 1);

    for (Index t = 0; t < cfg.trials; ++t) {
      const SolveReport rep = run_resolved(
          problem, rs, child_seed(solver_base, static_cast<std::uint64_t>(t)),
          &x_ref);
      for (const auto& rec : rep.records) {
        if (rec.inner != 0) continue; // CSV carries outer iterations only
        block += std::to_string(t);
        block += ',';
        block += std::to_string(rec.outer);
        block += ',';
        block += std::to_string(rec.cum_flops);
        block += ',';
        fmt17(block, cfg.record_wall_time ? rec.wall_time_s : 0.0);
        block += ',';
        fmt17(block, rec.rel_error);
        block += ',';
        fmt17(block, rec.residual);
        block += ',';
        block += std::to_string(rec.subsolver_iters);
        block += '\n';
      }
      if (rep.aborted) {
        aborted_trials.push_back(t);
        abort_reasons.push_back(rep.abort_reason);
      }
      rates.push_back(rep.converged_rate_estimate);
      for (std::size_t e = 0; e < etas.size(); ++e) {
        double flops_at = std::numeric_limits<double>::infinity();
        for (const auto& rec : rep.records) {
          if (rec.inner != 0 || rec.rel_error < 0.0) continue;
          if (rec.rel_error <= etas[e].second) {
            flops_at = static_cast<double>(rec.cum_flops);
            break;
          }
        }
        eta_flops[e].push_back(flops_at);
      }
    }
    out << block;
    if (!out) throw std::runtime_error("write failed for " + result.csv_paths[si]);

    ojson js;
    js["name"] = rs.name;
    js["solver"] = to_string(rs.family);
    if (rs.family != SolverFamily::BaselineLsqr) {
      js["scheme"] = rs.scheme == Scheme::Exact ? "exact" : "inexact";
      js["sketch"] = to_string(rs.cfg.sketch);
      js["m"] = rs.cfg.m;
      if (rs.cfg.m2 > 0) js["m2"] = rs.cfg.m2;
    }
    js["lambda"] = rs.cfg.lambda;
    js["sd"] = rs.sd;
    if (rs.theoretical_rate > 0.0) js["theoretical_rate"] = rs.theoretical_rate;
    js["median_rate_estimate"] = median(rates);
    ojson jeta;
    for (std::size_t e = 0; e < etas.size(); ++e) {
      const double med = lower_median(eta_flops[e]);
      jeta[etas[e].first] =
          std::isinf(med) ? -1 : static_cast<long long>(med);
    }
    js["flops_to_eta"] = jeta;
    if (!aborted_trials.empty()) {
      js["aborted_trials"] = aborted_trials;
      js["abort_reasons"] = abort_reasons;
    }
    jsolvers.push_back(std::move(js));
  }

  ojson summary;
  summary["seed"] = cfg.seed;
  summary["trials"] = cfg.trials;
  ojson jprob;
  if (!cfg.problem.matrix_file.empty()) {
    jprob["matrix_file"] = cfg.problem.matrix_file;
    jprob["rhs_file"] = cfg.problem.rhs_file;
  } else {
    jprob["n"] = cfg.problem.n;
    jprob["d"] = cfg.problem.d;
    jprob["profile"] = to_string(cfg.problem.profile.tag);
    jprob["kappa"] = cfg.problem.kappa;
    jprob["noise_level"] = cfg.problem.noise_level;
    jprob["x_true"] = cfg.problem.x_kind == XTrueKind::Smooth ? "smooth" : "uniform";
  }
  jprob["lambda"] = problem.lambda;
  summary["problem"] = std::move(jprob);
  summary["solvers"] = std::move(jsolvers);

  result.summary_json = summary.dump(2);
  result.summary_json += '\n';
  summary_file << result.summary_json;
  if (!summary_file)
    throw std::runtime_error("write failed for " + result.summary_path);
  return result;
}

} // namespace mihs
