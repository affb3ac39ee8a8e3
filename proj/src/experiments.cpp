#include "pdiv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "pdiv/barrier_solver.hpp"
#include "pdiv/errors.hpp"
#include "pdiv/simulator.hpp"
#include "pdiv/verification.hpp"

namespace pdiv {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string hex(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) { return format_double(v); }

CsvTable make_table(const ExperimentConfig& cfg, const std::string& command,
                    std::vector<std::string> columns) {
  CsvTable t;
  t.metadata.push_back(std::string("tool pdiv ") + kToolVersion);
  t.metadata.push_back("command " + command);
  t.metadata.push_back("config_hash " + hex(cfg.hash()));
  t.metadata.push_back(std::string("problem ") + to_string(cfg.problem.kind));
  t.columns = std::move(columns);
  return t;
}

double x_upper(const ExperimentConfig& cfg, double barrier, double phi_qr) {
  if (cfg.grid.x_max > 0.0) return cfg.grid.x_max;
  return barrier + 5.0 / phi_qr;
}

bool is_dividends(const ExperimentConfig& cfg) {
  return cfg.problem.kind == ProblemKind::dividends;
}

std::vector<double> default_alternatives(double barrier) {
  if (barrier <= 0.0) return {0.5, 1.0, 1.5, 2.0};
  return {0.0, 0.5 * barrier, 1.5 * barrier, 2.0 * barrier};
}

// Largest drop g(x_i) - g(x_{i+1}) along an increasing grid.
double largest_decrease(const SmoothCurve& g, const std::vector<double>& grid) {
  double drop = 0.0;
  double prev = g.value(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = g.value(grid[i]);
    drop = std::max(drop, prev - cur);
    prev = cur;
  }
  return drop;
}

}  // namespace

CommandResult cmd_solve(const ExperimentConfig& cfg) {
  CommandResult res;
  res.command = "solve";
  const auto model = cfg.build_model();
  const Valuation val(model, cfg.problem);
  const auto sol = solve_barrier(val);
  const auto curve = val.optimal_value(sol.level);
  const double phi_q = val.scale().base().phi();
  const double phi_qr = val.scale().phi_qr();
  const double threshold = is_dividends(cfg) ? zero_barrier_threshold(val) : kNaN;
  const double ref_value = curve->value(cfg.reference_x);

  double classical = kNaN;
  try {
    classical = val.classical_limit().barrier;
  } catch (const DomainError&) {
  }

  auto t = make_table(cfg, "solve",
                      {"phi_q", "phi_qr", "psi_prime_0", "threshold", "barrier", "is_zero",
                       "residual", "iterations", "reference_x", "value_at_reference",
                       "fit_gap_1", "fit_gap_2", "fit_gap_3", "classical_barrier"});
  t.add_row({phi_q, phi_qr, val.psi0(), threshold, sol.level, sol.is_zero ? 1.0 : 0.0,
             sol.residual, static_cast<double>(sol.iterations), cfg.reference_x, ref_value,
             sol.smooth_fit.first, sol.smooth_fit.second, sol.smooth_fit.third, classical});
  res.tables.push_back({"solve", std::move(t)});

  const char* name = is_dividends(cfg) ? "b*" : "b_dagger";
  res.summary.push_back("Phi(q)      = " + fmt(phi_q));
  res.summary.push_back("Phi(q+r)    = " + fmt(phi_qr));
  res.summary.push_back("psi'(0+)    = " + fmt(val.psi0()));
  if (is_dividends(cfg)) res.summary.push_back("I_{r,q}     = " + fmt(threshold));
  if (sol.is_zero) {
    res.summary.push_back(std::string(name) + " = 0 (take-the-money-and-run)");
  } else {
    res.summary.push_back(std::string(name) + " = " + fmt(sol.level) + " (residual " +
                          fmt(sol.residual) + ", " + std::to_string(sol.iterations) +
                          " iterations)");
  }
  res.summary.push_back("value at x=" + fmt(cfg.reference_x) + " : " + fmt(ref_value));
  res.summary.push_back("smooth fit gaps (1st, 2nd, 3rd): " + fmt(sol.smooth_fit.first) + ", " +
                        fmt(sol.smooth_fit.second) + ", " + fmt(sol.smooth_fit.third));
  if (!std::isnan(classical)) res.summary.push_back("classical barrier = " + fmt(classical));

  res.details = {{"barrier", sol.level},   {"is_zero", sol.is_zero},
                 {"residual", sol.residual}, {"phi_q", phi_q},
                 {"phi_qr", phi_qr},         {"psi_prime_0", val.psi0()}};
  return res;
}

CommandResult cmd_curve(const ExperimentConfig& cfg) {
  CommandResult res;
  res.command = "curve";
  const auto model = cfg.build_model();
  const Valuation val(model, cfg.problem);
  const auto sol = solve_barrier(val);
  const auto optimal = val.optimal_value(sol.level);
  const auto alts = cfg.sweep.b_list.empty() ? default_alternatives(sol.level) : cfg.sweep.b_list;
  const auto grid = uniform_grid(0.0, x_upper(cfg, sol.level, val.scale().phi_qr()),
                                 cfg.grid.n_points);

  std::vector<std::string> columns{"x", is_dividends(cfg) ? "v_star" : "u_dagger"};
  std::vector<BarrierCurve> curves;
  for (const double b : alts) {
    columns.push_back((is_dividends(cfg) ? "v_b=" : "u_b=") + fmt(b));
    curves.push_back(val.npv(b));
  }
  columns.push_back("max_alternative");
  auto t = make_table(cfg, "curve", columns);
  t.metadata.push_back("barrier " + fmt(sol.level));

  double worst = -std::numeric_limits<double>::infinity();
  for (const double x : grid) {
    std::vector<double> row{x, optimal->value(x)};
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : curves) {
      row.push_back(c.value(x));
      best = std::max(best, row.back());
    }
    row.push_back(best);
    worst = std::max(worst, best - row[1]);
    t.add_row(std::move(row));
  }
  res.tables.push_back({"curve", std::move(t)});
  res.summary.push_back("barrier = " + fmt(sol.level));
  res.summary.push_back("max over x of (best alternative - optimal) = " + fmt(worst));
  res.details = {{"barrier", sol.level}, {"alternatives", alts}, {"max_violation", worst}};
  return res;
}

CommandResult cmd_fcurve(const ExperimentConfig& cfg) {
  CommandResult res;
  res.command = "fcurve";
  const auto model = cfg.build_model();
  const Valuation val(model, cfg.problem);
  const auto sol = solve_barrier(val);
  const double hi = cfg.grid.x_max > 0.0
                        ? cfg.grid.x_max
                        : std::max(2.0 * sol.level, sol.level + 5.0 / val.scale().phi_qr());
  const auto grid = uniform_grid(0.0, hi, cfg.grid.n_points);
  auto t = make_table(cfg, "fcurve", {"b", is_dividends(cfg) ? "f" : "f_hat"});
  t.metadata.push_back("root " + fmt(sol.level));
  for (const double b : grid) {
    t.add_row({b, is_dividends(cfg) ? smoothness_function(val, b)
                                    : bailout_smoothness_function(val, b)});
  }
  res.tables.push_back({"fcurve", std::move(t)});
  res.summary.push_back("root = " + fmt(sol.level) + (sol.is_zero ? " (no positive root)" : ""));
  res.details = {{"barrier", sol.level}, {"is_zero", sol.is_zero}};
  return res;
}

CommandResult cmd_hjb(const ExperimentConfig& cfg) {
  CommandResult res;
  res.command = "hjb";
  const auto model = cfg.build_model();
  const Valuation val(model, cfg.problem);
  const auto sol = solve_barrier(val);
  const auto grid = hjb_grid(x_upper(cfg, sol.level, val.scale().phi_qr()), cfg.grid.n_points);
  const auto rep = is_dividends(cfg) ? hjb_check_dividends(val, sol.level, grid)
                                     : hjb_check_bailout(val, sol.level, grid);
  auto t = make_table(cfg, "hjb",
                      {"x", "value", "generator_residual", "closed_form_reference", "max_term",
                       "hjb_value"});
  t.metadata.push_back("barrier " + fmt(sol.level));
  t.metadata.push_back(std::string("certified ") + (rep.certified ? "true" : "false"));
  double max_hjb = 0.0;
  for (std::size_t i = 0; i < rep.grid.size(); ++i) {
    t.add_row({rep.grid[i], rep.value[i], rep.generator_residual[i],
               rep.closed_form_reference[i], rep.max_term[i], rep.hjb_value[i]});
    max_hjb = std::max(max_hjb, std::abs(rep.hjb_value[i]));
  }
  res.tables.push_back({"hjb", std::move(t)});
  res.summary.push_back("barrier = " + fmt(sol.level));
  res.summary.push_back("max |HJB| on grid = " + fmt(max_hjb) + " (tolerance " +
                        fmt(rep.hjb_tol) + ")");
  if (!is_dividends(cfg)) {
    res.summary.push_back("u'(0) = " + fmt(rep.derivative_at_zero));
  }
  for (const auto& f : rep.failures) res.summary.push_back("failure: " + f);
  res.summary.push_back(rep.certified ? "certified" : "NOT certified");
  res.details = {{"barrier", sol.level},
                 {"certified", rep.certified},
                 {"max_abs_hjb", max_hjb},
                 {"failures", rep.failures}};
  res.exit_code = rep.certified ? kExitOk : kExitCertification;
  return res;
}

CommandResult cmd_simulate(const ExperimentConfig& cfg) {
  CommandResult res;
  res.command = "simulate";
  const auto model = cfg.build_model();
  const Valuation val(model, cfg.problem);
  const auto sol = solve_barrier(val);
  const auto optimal = val.optimal_value(sol.level);

  auto t = make_table(cfg, "simulate",
                      {"x", "analytic", "mc_mean", "std_error", "tolerance", "abs_error",
                       "within", "analytic_dividends", "mc_dividends", "analytic_aux",
                       "mc_aux", "decision_rate", "decision_rate_std_error"});
  t.metadata.push_back("barrier " + fmt(sol.level));
  t.metadata.push_back("paths " + std::to_string(cfg.mc.paths));
  t.metadata.push_back("seed " + std::to_string(cfg.mc.seed));
  t.metadata.push_back(std::string("rng ") + kRngAlgorithm);
  t.metadata.push_back("aux " + std::string(is_dividends(cfg) ? "E[exp(-q tau)]"
                                                               : "E[int exp(-q t) dR]"));
  bool all_within = true;
  for (const double x : cfg.mc_x_list) {
    const auto est = is_dividends(cfg)
                         ? simulate_dividends(model, cfg.problem, sol.level, x, cfg.mc)
                         : simulate_bailout(model, cfg.problem, sol.level, x, cfg.mc);
    const auto comp = val.components(sol.level, x);
    const double exact = optimal->value(x);
    const double tol = est.tolerance(3.0);
    const double err = std::abs(est.mean - exact);
    const bool within = err <= tol;
    all_within = all_within && within;
    t.add_row({x, exact, est.mean, est.std_error, tol, err, within ? 1.0 : 0.0, comp.dividends,
               est.dividends, is_dividends(cfg) ? comp.ruin_transform : comp.injections,
               is_dividends(cfg) ? est.ruin_transform : est.injections, est.decision_rate,
               est.decision_rate_std_error});
    res.summary.push_back("x=" + fmt(x) + "  analytic " + fmt(exact) + "  mc " + fmt(est.mean) +
                          " +- " + fmt(est.std_error) + (within ? "  ok" : "  MISMATCH"));
  }
  res.tables.push_back({"simulate", std::move(t)});
  res.details = {{"barrier", sol.level}, {"all_within_3se", all_within}};
  res.exit_code = all_within ? kExitOk : kExitCertification;
  return res;
}

CommandResult cmd_sweep(const ExperimentConfig& cfg) {
  CommandResult res;
  res.command = "sweep";
  const auto model = cfg.build_model();
  const bool over_r = cfg.sweep.over == "r";
  const auto& params = over_r ? cfg.sweep.r_list : cfg.sweep.rho_list;
  if (!over_r && !is_dividends(cfg)) {
    throw ConfigError("config error at /sweep/over: 'rho' sweeps need problem kind 'dividends'");
  }

  struct Point {
    double param;
    std::shared_ptr<Valuation> val;
    BarrierSolution sol;
  };
  std::vector<Point> points;
  for (const double p : params) {
    ProblemSpec spec = cfg.problem;
    (over_r ? spec.r : spec.rho) = p;
    try {
      spec.validate();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("config error at /sweep: ") + e.what());
    }
    auto val = std::make_shared<Valuation>(model, spec);
    points.push_back({p, val, solve_barrier(*val)});
  }

  // The classical counterpart does not depend on r or on the Poisson clock.
  std::optional<ClassicalSolution> classical;
  try {
    classical = Valuation(model, cfg.problem).classical_limit();
  } catch (const DomainError&) {
  }

  double top_barrier = 0.0;
  double min_phi_qr = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    top_barrier = std::max(top_barrier, p.sol.level);
    min_phi_qr = std::min(min_phi_qr, p.val->scale().phi_qr());
  }
  if (classical) top_barrier = std::max(top_barrier, classical->barrier);
  const auto grid = uniform_grid(0.0, x_upper(cfg, top_barrier, min_phi_qr), cfg.grid.n_points);

  auto t = make_table(cfg, "sweep",
                      over_r ? std::vector<std::string>{"r", "barrier", "is_zero", "residual",
                                                        "classical_barrier", "gap",
                                                        "value_at_reference"}
                             : std::vector<std::string>{"rho", "barrier", "is_zero", "residual",
                                                        "value_at_reference", "monotone",
                                                        "largest_decrease"});
  t.metadata.push_back("over " + cfg.sweep.over);
  t.metadata.push_back("reference_x " + fmt(cfg.reference_x));
  std::vector<std::string> curve_cols{"x"};
  for (const auto& p : points) curve_cols.push_back((over_r ? "r=" : "rho=") + fmt(p.param));
  if (over_r && classical) curve_cols.push_back("classical");
  auto curves = make_table(cfg, "sweep", curve_cols);
  curves.metadata.push_back("over " + cfg.sweep.over);

  std::vector<std::shared_ptr<const SmoothCurve>> values;
  json barriers = json::array();
  for (const auto& p : points) {
    auto v = p.val->optimal_value(p.sol.level);
    const double ref = v->value(cfg.reference_x);
    if (over_r) {
      const double cb = classical ? classical->barrier : kNaN;
      const double gap = classical ? std::abs(p.sol.level - cb) : kNaN;
      t.add_row({p.param, p.sol.level, p.sol.is_zero ? 1.0 : 0.0, p.sol.residual, cb, gap, ref});
      res.summary.push_back("r=" + fmt(p.param) + "  barrier " + fmt(p.sol.level));
    } else {
      const double drop = largest_decrease(*v, grid);
      const bool monotone = drop <= 1e-12;
      t.add_row({p.param, p.sol.level, p.sol.is_zero ? 1.0 : 0.0, p.sol.residual, ref,
                 monotone ? 1.0 : 0.0, drop});
      res.summary.push_back("rho=" + fmt(p.param) + "  barrier " + fmt(p.sol.level) +
                            (monotone ? "" : "  (value not monotone in x)"));
    }
    barriers.push_back(p.sol.level);
    values.push_back(std::move(v));
  }
  if (over_r && classical) {
    res.summary.push_back("classical barrier " + fmt(classical->barrier));
  }
  for (const double x : grid) {
    std::vector<double> row{x};
    for (const auto& v : values) row.push_back(v->value(x));
    if (over_r && classical) row.push_back(classical->curve->value(x));
    curves.add_row(std::move(row));
  }
  res.tables.push_back({"sweep", std::move(t)});
  res.tables.push_back({"sweep_curves", std::move(curves)});
  res.details = {{"over", cfg.sweep.over}, {"parameters", params}, {"barriers", barriers}};
  if (classical) res.details["classical_barrier"] = classical->barrier;
  return res;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"solve", "curve", "fcurve",
                                              "hjb",   "simulate", "sweep"};
  return names;
}

CommandResult run_command(const std::string& name, const ExperimentConfig& cfg) {
  if (name == "solve") return cmd_solve(cfg);
  if (name == "curve") return cmd_curve(cfg);
  if (name == "fcurve") return cmd_fcurve(cfg);
  if (name == "hjb") return cmd_hjb(cfg);
  if (name == "simulate") return cmd_simulate(cfg);
  if (name == "sweep") return cmd_sweep(cfg);
  throw ConfigError("unknown command '" + name + "'");
}

namespace {

void write_plot_script(const std::filesystem::path& path, const std::string& csv_name,
                       const CsvTable& table) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "set datafile separator ','\n"
     << "set datafile commentschars '#'\n"
     << "set key autotitle columnhead\n"
     << "set terminal pngcairo size 900,600\n"
     << "set output '" << path.stem().string() << ".png'\n"
     << "set xlabel '" << table.columns.front() << "'\n"
     << "plot ";
  for (std::size_t c = 1; c < table.columns.size(); ++c) {
    if (c > 1) os << ", \\\n     ";
    os << "'" << csv_name << "' using 1:" << (c + 1) << " with lines";
  }
  os << "\n";
}

}  // namespace

std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& out,
                                                 const CommandResult& result,
                                                 const ExperimentConfig& cfg, bool plot_script) {
  std::filesystem::create_directories(out);
  std::vector<std::filesystem::path> written;
  json files = json::array();
  for (const auto& nt : result.tables) {
    const auto path = out / (nt.name + ".csv");
    write_csv(path, nt.table);
    written.push_back(path);
    files.push_back(path.filename().string());
    if (plot_script) {
      const auto gp = out / (nt.name + ".gp");
      write_plot_script(gp, path.filename().string(), nt.table);
      written.push_back(gp);
      files.push_back(gp.filename().string());
    }
  }
  json meta = {{"tool", "pdiv"},
               {"version", kToolVersion},
               {"command", result.command},
               {"config_hash", hex(cfg.hash())},
               {"config", cfg.to_json()},
               {"rng", kRngAlgorithm},
               {"outputs", files},
               {"summary", result.summary},
               {"result", result.details},
               {"exit_code", result.exit_code}};
  const auto meta_path = out / "meta.json";
  std::ofstream os(meta_path);
  if (!os) throw std::runtime_error("cannot write " + meta_path.string());
  os << meta.dump(2) << "\n";
  written.push_back(meta_path);
  return written;
}

}  // namespace pdiv
