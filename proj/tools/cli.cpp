#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "momsplit/certificates.hpp"
#include "momsplit/trace_io.hpp"

namespace momsplit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kPort5Help =
    "The portfolio problem needs the OR-Library file port5.txt (225 assets).\n"
    "Download it from the OR-Library portfolio page\n"
    "(http://people.brunel.ac.uk/~mastjjb/jeb/orlib/portinfo.html) and pass --dataset PATH.\n";

bool uses_split(Algorithm a, const RunConfig& cfg) {
  if (a == Algorithm::kFourOp || a == Algorithm::kNewOrfbs) return true;
  const bool momentum = a == Algorithm::kAlg1 || a == Algorithm::kAlg2 || a == Algorithm::kAlg3;
  return momentum && cfg.kernel == "split";
}

bool is_baseline(Algorithm a) {
  return a == Algorithm::kSfrbs || a == Algorithm::kSrfbs || a == Algorithm::kOrfbs || a == Algorithm::kFbhf;
}

ConstantSet base_constants(Algorithm a, const SaddleProblem& p, const RunConfig& cfg) {
  ConstantSet c;
  c.mu = p.mu;
  c.beta = p.beta;
  c.eps = cfg.eps;
  c.eps1 = cfg.eps1.value_or(1.0);
  c.eps2 = cfg.eps2.value_or(1.0);
  c.eps3 = cfg.eps3.value_or(1.0);
  c.eps4 = cfg.eps4.value_or(1.0);
  c.eps5 = cfg.eps5;
  c.eps6 = cfg.eps6;
  c.eps7 = cfg.eps7.value_or(0.1);
  c.eps8 = cfg.eps8;
  c.alpha = cfg.alpha.value_or(1e-3);
  if (cfg.rho > 0.0) c.rho = cfg.rho;
  if (uses_split(a, cfg)) {
    c.mu = 0.5 * p.mu;
    c.a2_lipschitz = 0.5 * p.mu;
  }
  if (cfg.L && !is_baseline(a)) {
    c.a2_lipschitz.reset();
    c.L_prev2 = c.L_prev = c.L_cur = *cfg.L;
  }
  return c;
}

/// Picks (eps5, eps6) on a log grid to maximize the admissible step size.
void choose_alg3_eps(Algorithm a, ConstantSet& c) {
  if (c.eps5 && c.eps6) return;
  const double scale = c.mu > 0.0 ? 1.0 / c.mu : 1.0;
  double best = -1.0;
  ConstantSet chosen = c;
  for (int i = -4; i <= 6; ++i) {
    for (int j = -4; j <= 6; ++j) {
      ConstantSet trial = c;
      if (!c.eps5) trial.eps5 = std::ldexp(scale, i);
      if (!c.eps6) trial.eps6 = std::ldexp(1.0, j);
      const MaxGamma mg = max_gamma(a, trial);
      if (mg.feasible && mg.value > best) {
        best = mg.value;
        chosen = trial;
      }
    }
  }
  if (!chosen.eps5) chosen.eps5 = scale;
  if (!chosen.eps6) chosen.eps6 = 1.0;
  c = chosen;
}

double parse_gamma(const std::string& s) {
  try {
    std::size_t used = 0;
    const double g = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return g;
  } catch (const std::exception&) {
    throw ArgumentError("--gamma must be 'auto' or a number, got '" + s + "'");
  }
}

struct RunResult {
  std::uint64_t seed = 0;
  std::string algorithm;
  std::optional<Trace> trace;
  std::optional<double> objective;
  std::string error;
};

Trace execute(const AlgorithmSetup& s, const SaddleProblem& p, const SolverConfig& config) {
  if (s.split) return run(config, *s.split, p.z0);
  return run(config, s.triple, p.z0);
}

Vector reference_solution(const AlgorithmSetup& s, const SaddleProblem& p, const RunConfig& cfg) {
  SolverConfig ref = s.solver;
  ref.stop.rel_change_tol = cfg.ref_tol;
  ref.stop.max_iter = static_cast<std::size_t>(cfg.ref_max_iter.value_or(10 * cfg.max_iter));
  ref.record_trace = false;
  ref.observer = nullptr;
  ref.known_solution.reset();
  return execute(s, p, ref).final_state.x;
}

CertContext make_cert_context(const AlgorithmSetup& s, const Vector& x_star) {
  CertContext ctx;
  ctx.x_star = x_star;
  ctx.B = s.split ? s.split->B : s.triple.B;
  ctx.metric = Metric::identity(x_star.size());
  ctx.mu = s.constants.mu;
  ctx.beta = s.constants.beta;
  ctx.gamma = s.gamma;
  ctx.L = is_baseline(s.algorithm) ? 0.0 : s.constants.L_cur;
  ctx.eps2 = s.constants.eps2;
  ctx.eps5 = s.constants.eps5;
  ctx.eps6 = s.constants.eps6;
  ctx.alpha = s.constants.alpha;
  return ctx;
}

std::vector<Algorithm> parse_algorithms(const RunConfig& cfg) {
  std::vector<Algorithm> out;
  for (const std::string& name : cfg.algs) {
    const auto a = parse_algorithm(name);
    if (!a) throw ArgumentError("unknown algorithm '" + name + "'");
    out.push_back(*a);
  }
  if (out.empty()) throw ArgumentError("no algorithm selected (--alg)");
  return out;
}

std::string num(double v) { return format_number(v); }

// ---------------------------------------------------------------------------
// check

bool report_conditions(const AlgorithmSetup& s, const RunConfig& cfg, std::ostream& out) {
  const ConstantSet& c = s.constants;
  const Algorithm fam = theory_family(s.algorithm);
  bool ok = true;
  out << "  gamma = " << num(s.gamma) << (cfg.gamma == "auto" ? " (auto)" : "") << "\n";
  if (s.max_gamma) {
    out << "  sup gamma = " << (s.max_gamma->feasible ? num(s.max_gamma->value) : std::string("none (infeasible)"))
        << "\n";
  }
  ConstantSet cc = c;
  if (is_baseline(s.algorithm)) cc.L_prev2 = cc.L_prev = cc.L_cur = 0.0;
  switch (fam) {
    case Algorithm::kAlg1: {
      const double m = check_alg1(cc);
      out << "  L = " << num(cc.L_cur) << "\n  margin = " << num(m) << "\n";
      ok = m >= 0.0;
      if (c.rho) {
        try {
          out << "  rate t = " << num(rate_t_alg1(cc)) << "\n";
        } catch (const std::exception& e) {
          out << "  rate t: " << e.what() << "\n";
        }
      }
      break;
    }
    case Algorithm::kAlg2: {
      const Alg2Margins m = check_alg2(cc);
      out << "  L = " << num(cc.L_cur) << "\n  margin1 = " << num(m.margin1) << "\n  margin2 = " << num(m.margin2)
          << "\n";
      ok = m.ok();
      if (c.rho) {
        try {
          out << "  rate t = " << num(rate_t_alg2(cc)) << "\n";
        } catch (const std::exception& e) {
          out << "  rate t: " << e.what() << "\n";
        }
      }
      break;
    }
    case Algorithm::kAlg3: {
      out << "  L = " << num(cc.L_cur) << "  eps5 = " << num(*cc.eps5) << "  eps6 = " << num(*cc.eps6)
          << "  eps7 = " << num(*cc.eps7) << "  alpha = " << num(*cc.alpha) << "\n";
      try {
        const Alg3Check r = check_alg3(cc);
        out << "  margin (i) = " << num(r.margin_i) << "\n  margin (ii) = " << num(r.margin_ii)
            << "\n  gamma window (iii) = [" << num(r.window.lo) << ", " << num(r.window.hi) << "]"
            << (r.gamma_in_window ? " contains gamma" : " excludes gamma") << "\n";
        ok = r.ok();
      } catch (const PreconditionError& e) {
        out << "  " << e.what() << "\n";
        ok = false;
      }
      if (c.rho) {
        try {
          ConstantSet rc = cc;
          if (!rc.eps8) rc.eps8 = 0.5 * (s.gamma / (alg3_A_rate(rc) + *rc.alpha) + s.gamma);
          out << "  rate t = " << num(rate_t_alg3(rc)) << "\n";
        } catch (const std::exception& e) {
          out << "  rate t: " << e.what() << "\n";
        }
      }
      break;
    }
    case Algorithm::kFbhf: {
      out << "  chi = " << num(fbhf_chi(c.mu, c.beta)) << "\n  margin = " << num(check_fbhf(c)) << "\n";
      ok = check_fbhf(c) >= 0.0;
      break;
    }
    default:
      break;
  }
  out << "  " << (ok ? "PASS" : "FAIL") << "\n";
  return ok;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const auto algs = parse_algorithms(cfg);
  const SaddleProblem p = build_problem(cfg, cfg.seed);
  out << "problem " << cfg.problem << ": dim = " << (p.n + p.q) << "  mu = " << num(p.mu) << "  beta = " << num(p.beta)
      << "\n";
  bool all_ok = true;
  for (Algorithm a : algs) {
    out << "[" << to_string(a) << "] kernel = " << (uses_split(a, cfg) ? "split" : "classic") << "\n";
    try {
      const AlgorithmSetup s = setup_algorithm(a, p, cfg);
      all_ok = report_conditions(s, cfg, out) && all_ok;
    } catch (const ConditionError& e) {
      out << "  " << e.what() << "\n  FAIL\n";
      all_ok = false;
    }
  }
  return all_ok ? kOk : kInfeasible;
}

// ---------------------------------------------------------------------------
// run

std::vector<RunResult> run_seed(const RunConfig& cfg, const std::vector<Algorithm>& algs, std::uint64_t seed) {
  std::vector<RunResult> results;
  const SaddleProblem p = build_problem(cfg, seed);
  for (Algorithm a : algs) {
    RunResult r;
    r.seed = seed;
    r.algorithm = std::string(to_string(a));
    try {
      AlgorithmSetup s = setup_algorithm(a, p, cfg);
      if (cfg.cert) {
        const Vector x_star = reference_solution(s, p, cfg);
        CertificateMonitor monitor(certificate_for(a), make_cert_context(s, x_star));
        s.solver.observer = monitor.observer();
        s.solver.known_solution = x_star;
      }
      Trace t = execute(s, p, s.solver);
      if (p.objective) r.objective = p.objective(t.final_state.x.head(p.n));
      r.trace = std::move(t);
    } catch (const ConditionError& e) {
      r.error = e.what();
    } catch (const UnsupportedConfiguration& e) {
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto algs = parse_algorithms(cfg);
  if (cfg.repeat < 1) throw ArgumentError("--repeat must be >= 1");

  std::vector<std::vector<RunResult>> per_seed(static_cast<std::size_t>(cfg.repeat));
  const int jobs = std::max(1, cfg.jobs);
  for (int start = 0; start < cfg.repeat; start += jobs) {
    std::vector<std::future<std::vector<RunResult>>> batch;
    for (int i = start; i < std::min(cfg.repeat, start + jobs); ++i) {
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_seed, std::cref(cfg),
                                 std::cref(algs), cfg.seed + static_cast<std::uint64_t>(i)));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) per_seed[static_cast<std::size_t>(start) + i] = batch[i].get();
  }

  if (!cfg.out.empty()) fs::create_directories(cfg.out);

  int code = kOk;
  json summary = json::object();
  summary["runs"] = json::array();
  std::map<std::string, std::pair<double, double>> totals;
  std::map<std::string, int> counts;

  out << std::left << std::setw(10) << "algorithm" << std::setw(8) << "seed" << std::setw(11) << "status"
      << std::setw(10) << "iters" << std::setw(18) << "time_s" << std::setw(18) << "final_Ek"
      << "objective\n";
  for (const auto& results : per_seed) {
    for (const RunResult& r : results) {
      if (!r.trace) {
        err << r.algorithm << " (seed " << r.seed << "): " << r.error << "\n";
        code = std::max<int>(code, kInfeasible);
        continue;
      }
      RunSummary s = summarize(r.algorithm, *r.trace, r.objective);
      s.seed = r.seed;
      summary["runs"].push_back(summary_json(s));
      out << std::setw(10) << r.algorithm << std::setw(8) << r.seed << std::setw(11) << to_string(s.status)
          << std::setw(10) << s.iters << std::setw(18) << num(s.time_s) << std::setw(18) << num(s.final_Ek)
          << (s.objective ? num(*s.objective) : std::string("-")) << "\n";
      auto& tot = totals[r.algorithm];
      tot.first += static_cast<double>(s.iters);
      tot.second += s.time_s;
      ++counts[r.algorithm];
      if (!cfg.out.empty()) {
        const fs::path file = fs::path(cfg.out) / (r.algorithm + "_seed" + std::to_string(r.seed) + ".csv");
        std::ofstream f(file);
        if (!f) throw std::runtime_error("cannot write " + file.string());
        write_trace_csv(f, *r.trace, cfg.timing);
      }
      if (s.status == RunStatus::kDiverged) {
        err << r.algorithm << " (seed " << r.seed << ") diverged\n";
        if (cfg.strict) code = kDiverged;
      }
    }
  }

  if (cfg.repeat > 1) {
    summary["averages"] = json::array();
    for (const auto& [name, tot] : totals) {
      const double n = counts[name];
      summary["averages"].push_back({{"algorithm", name}, {"av_iter", tot.first / n}, {"av_time_s", tot.second / n}});
      out << "average " << name << ": iters " << num(tot.first / n) << "  time_s " << num(tot.second / n) << "\n";
    }
  }
  if (!cfg.out.empty()) {
    std::ofstream f(fs::path(cfg.out) / "summary.json");
    if (!f) throw std::runtime_error("cannot write summary.json");
    f << summary.dump(2) << "\n";
  }
  return code;
}

// ---------------------------------------------------------------------------
// certify

int cmd_certify(const RunConfig& cfg, std::ostream& out) {
  const auto algs = parse_algorithms(cfg);
  const SaddleProblem p = build_problem(cfg, cfg.seed);
  int code = kOk;
  for (Algorithm a : algs) {
    out << "[" << to_string(a) << "]\n";
    CertKind kind;
    try {
      kind = certificate_for(a);
    } catch (const UnsupportedConfiguration& e) {
      out << "  " << e.what() << "\n";
      code = std::max<int>(code, kInfeasible);
      continue;
    }
    AlgorithmSetup s;
    try {
      s = setup_algorithm(a, p, cfg);
    } catch (const ConditionError& e) {
      out << "  " << e.what() << "\n";
      code = std::max<int>(code, kInfeasible);
      continue;
    }
    const Vector x_star = reference_solution(s, p, cfg);
    // Checked on the full inclusion; the split kernel leaves only part of B in s.triple.
    OperatorTriple full = p.triple;
    if (cfg.rho > 0.0) full.A = Resolvent::shifted(full.A, cfg.rho);
    const bool zero_ok = verify_zero(full, x_star, 1e-8);
    const char* name = kind == CertKind::kPsi ? "Psi" : kind == CertKind::kXi ? "Xi" : "S";
    out << "  certificate " << name << "  gamma = " << num(s.gamma) << "\n";
    out << "  reference zero verified (1e-8): " << (zero_ok ? "yes" : "no") << "\n";
    const double margin = primary_margin(a, s.constants);
    out << "  condition margin = " << num(margin)
        << (margin >= 0.0 ? "" : "  (conditions fail; decrease is not guaranteed)") << "\n";

    CertificateMonitor monitor(kind, make_cert_context(s, x_star));
    SolverConfig config = s.solver;
    config.observer = monitor.observer();
    config.record_trace = false;
    try {
      execute(s, p, config);
    } catch (const PreconditionError& e) {
      out << "  " << e.what() << "\n";
      code = std::max<int>(code, kInfeasible);
      continue;
    }
    double min_slack = std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    for (const CertStep& st : monitor.steps()) {
      min_slack = std::min(min_slack, st.slack);
      if (!st.decrease_ok || !st.lower_ok) ++violations;
    }
    out << "  steps checked = " << monitor.steps().size() << "  min slack = " << num(min_slack)
        << "  violations = " << violations << "\n";
    if (auto v = monitor.first_violation()) {
      out << "  first violation at k = " << v->k << "  slack = " << num(v->slack)
          << (v->lower_ok ? "" : "  (lower bound)") << "\n  FAIL\n";
      code = std::max<int>(code, kCertificateViolation);
    } else {
      out << "  PASS\n";
    }
  }
  return code;
}

// ---------------------------------------------------------------------------
// options and config file

template <typename T>
void assign_json(T& ref, const json& j) {
  ref = j.get<T>();
}
template <>
void assign_json(std::string& ref, const json& j) {
  ref = j.is_string() ? j.get<std::string>() : j.dump();
}
template <typename T>
void assign_json(std::optional<T>& ref, const json& j) {
  if (j.is_null()) {
    ref.reset();
  } else {
    ref = j.get<T>();
  }
}
template <typename T>
void assign_json(std::vector<T>& ref, const json& j) {
  ref.clear();
  if (j.is_array()) {
    for (const auto& e : j) ref.push_back(e.get<T>());
  } else {
    ref.push_back(j.get<T>());
  }
}

struct Binding {
  CLI::Option* option = nullptr;
  std::function<void(const json&)> assign;
};

class OptionTable {
 public:
  explicit OptionTable(CLI::App& app) : app_(app) {}

  template <typename T>
  void option(const std::string& name, T& ref, const std::string& desc) {
    CLI::Option* o = app_.add_option("--" + name, ref, desc);
    bindings_[name] = {o, [&ref](const json& j) { assign_json(ref, j); }};
  }
  void flag(const std::string& name, bool& ref, const std::string& desc) {
    CLI::Option* o = app_.add_flag("--" + name, ref, desc);
    bindings_[name] = {o, [&ref](const json& j) { ref = j.get<bool>(); }};
  }

  void apply(const json& doc) const {
    if (!doc.is_object()) throw ParseError(0, "config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      const auto it = bindings_.find(name);
      if (it == bindings_.end()) throw ParseError(0, "unknown config key '" + key + "'");
      if (it->second.option->count() > 0) continue;
      try {
        it->second.assign(value);
      } catch (const json::exception& e) {
        throw ParseError(0, "config key '" + key + "': " + e.what());
      }
    }
  }

 private:
  CLI::App& app_;
  std::map<std::string, Binding> bindings_;
};

}  // namespace

SaddleProblem build_problem(const RunConfig& cfg, std::uint64_t seed) {
  if (cfg.problem == "qp") return build_qp(cfg.m, cfg.q, seed).saddle;
  if (cfg.problem == "portfolio") {
    if (cfg.dataset.empty() || !fs::exists(cfg.dataset)) {
      throw std::runtime_error(std::string("dataset not found: '") + cfg.dataset + "'\n" + kPort5Help);
    }
    std::string format = cfg.dataset_format;
    if (format == "auto") format = fs::path(cfg.dataset).extension() == ".csv" ? "csv" : "or-library";
    AssetData data;
    if (format == "csv") {
      data = parse_csv_covariance(cfg.dataset);
    } else if (format == "or-library") {
      data = parse_or_library(cfg.dataset);
    } else {
      throw ArgumentError("unknown --dataset-format '" + format + "'");
    }
    std::vector<Index> groups(cfg.groups.begin(), cfg.groups.end());
    return build_portfolio(data, cfg.r, groups).saddle;
  }
  if (cfg.problem == "custom") {
    if (cfg.problem_file.empty()) throw ArgumentError("--problem custom needs --problem-file");
    return load_custom_problem(cfg.problem_file);
  }
  throw ArgumentError("unknown problem '" + cfg.problem + "'");
}

AlgorithmSetup setup_algorithm(Algorithm a, const SaddleProblem& p, const RunConfig& cfg) {
  AlgorithmSetup s;
  s.algorithm = a;
  ConstantSet c = base_constants(a, p, cfg);
  if (theory_family(a) == Algorithm::kAlg3) choose_alg3_eps(a, c);

  const MaxGamma mg = max_gamma(a, c);
  s.max_gamma = mg;
  if (cfg.gamma == "auto") {
    if (!mg.feasible || !std::isfinite(mg.value)) {
      throw ConditionError(std::string(to_string(a)) + ": no feasible step size; pass --gamma explicitly");
    }
    s.gamma = cfg.gamma_fraction * mg.value;
  } else {
    s.gamma = parse_gamma(cfg.gamma);
  }
  if (!(s.gamma > 0.0)) throw ArgumentError("gamma must be > 0");
  s.constants = at_gamma(c, s.gamma);

  s.triple = p.triple;
  if (cfg.rho > 0.0) s.triple.A = Resolvent::shifted(s.triple.A, cfg.rho);

  SolverConfig& sc = s.solver;
  sc.algorithm = a;
  sc.gamma = s.gamma;
  sc.constants = s.constants;
  sc.stop.rel_change_tol = cfg.tol;
  sc.stop.max_iter = static_cast<std::size_t>(std::max(0L, cfg.max_iter));

  if (a == Algorithm::kFourOp || a == Algorithm::kNewOrfbs) {
    s.split = split_triple(s.triple);
  } else if (uses_split(a, cfg)) {
    auto [a2, b2] = split_half(s.triple.B);
    const Resolvent A1 = s.triple.A;
    const Metric metric = s.triple.metric;
    s.triple.B = b2;
    sc.kernel_factory = [A1, a2 = a2, metric](double g) { return kernel_lipschitz_split(metric, A1, a2, g); };
  }
  return s;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string config_path;
  CLI::App app{"Momentum splitting solvers for 0 in Ax + Bx + Cx"};
  app.name("momsplit");
  app.require_subcommand(1, 1);
  app.add_subcommand("check", "step-size conditions, admissible step sizes and rates")->fallthrough();
  app.add_subcommand("run", "run solvers and write traces")->fallthrough();
  app.add_subcommand("certify", "run with Lyapunov certificate monitoring")->fallthrough();

  OptionTable t(app);
  app.add_option("--config", config_path, "flat JSON config; command-line flags take precedence");
  t.option("problem", cfg.problem, "qp | portfolio | custom");
  t.option("m", cfg.m, "qp: rows of G (N = 2m)");
  t.option("q", cfg.q, "qp: number of inequality constraints");
  t.option("seed", cfg.seed, "instance seed");
  t.option("repeat", cfg.repeat, "number of consecutive seeds");
  t.option("jobs", cfg.jobs, "worker threads for --repeat");
  t.option("dataset", cfg.dataset, "portfolio data file");
  t.option("dataset-format", cfg.dataset_format, "auto | or-library | csv");
  t.option("problem-file", cfg.problem_file, "custom problem JSON");
  t.option("r", cfg.r, "portfolio target return");
  t.option("groups", cfg.groups, "portfolio group sizes");
  t.option("alg", cfg.algs, "alg1|alg2|alg3|sfrbs|srfbs|orfbs|fbhf|four-op|new-orfbs (repeatable)");
  t.option("gamma", cfg.gamma, "step size or 'auto'");
  t.option("gamma-fraction", cfg.gamma_fraction, "fraction of the largest admissible step used by 'auto'");
  t.option("kernel", cfg.kernel, "classic | split (alg1-3)");
  t.option("L", cfg.L, "override the kernel constant L in the conditions");
  t.option("eps", cfg.eps, "condition slack epsilon");
  t.option("eps1", cfg.eps1, "");
  t.option("eps2", cfg.eps2, "");
  t.option("eps3", cfg.eps3, "");
  t.option("eps4", cfg.eps4, "");
  t.option("eps5", cfg.eps5, "");
  t.option("eps6", cfg.eps6, "");
  t.option("eps7", cfg.eps7, "");
  t.option("eps8", cfg.eps8, "");
  t.option("alpha", cfg.alpha, "");
  t.option("rho", cfg.rho, "shift A by rho*Id (strong monotonicity)");
  t.option("tol", cfg.tol, "stop when E_k < tol");
  t.option("max-iter", cfg.max_iter, "iteration cap");
  t.option("ref-tol", cfg.ref_tol, "tolerance of the reference solve used by certificates");
  t.option("ref-max-iter", cfg.ref_max_iter, "iteration cap of the reference solve");
  t.flag("cert", cfg.cert, "record the certificate column");
  t.option("out", cfg.out, "output directory");
  t.flag("strict", cfg.strict, "exit 2 on divergence");
  t.flag("timing", cfg.timing, "write wall-clock times into the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kIoError;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config " + config_path);
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("config: ") + e.what());
      }
      t.apply(doc);
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "check") return cmd_check(cfg, out);
    if (cfg.command == "run") return cmd_run(cfg, out, err);
    return cmd_certify(cfg, out);
  } catch (const ConditionError& e) {
    err << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const UnsupportedConfiguration& e) {
    err << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
}

}  // namespace momsplit::cli
