// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pdiv/barrier_solver.hpp"
#include "pdiv/simulator.hpp"
#include "pdiv/verification.hpp"

using pdiv::ProblemSpec;
using pdiv::Side;
using pdiv::Valuation;

namespace {

const oracle::Model kCase1{0.5, 0.2, 2.0, oracle::folded_normal_fit()};
const oracle::Model kCase2{2.0, 0.2, 2.0, oracle::folded_normal_fit()};
const oracle::Model kCase1NoDiffusion{0.5, 0.0, 2.0, oracle::folded_normal_fit()};
constexpr double kQ = 0.05;
constexpr double kR = 0.1;
constexpr double kBeta = 2.0;
const std::vector<double> kRates{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
const std::vector<double> kRhos{-20, -15, -10, -5, 0, 5, 10, 15, 20};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, double limit_s, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool pass = out.pass;
  std::string timing = "time " + std::to_string(secs).substr(0, 6) + " s";
  if (limit_s > 0.0) {
    timing += " (limit " + std::to_string(static_cast<int>(limit_s)) + " s)";
    pass = pass && secs < limit_s;
  }
  if (!pass) ++failures;
  std::printf("[%s] %2d %s: %s; %s\n", pass ? "PASS" : "FAIL", id, title, out.detail.c_str(),
              timing.c_str());
  std::fflush(stdout);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome laplace_identity() {
  const oracle::Model models[] = {{0.5, 0.0, 2.0, oracle::exponential(1.0)},
                                  {0.5, 0.2, 2.0, oracle::exponential(1.0)},
                                  kCase1};
  std::mt19937_64 gen(2024);
  double worst = 0.0;
  for (const auto& om : models) {
    const pdiv::ScaleFunction W(oracle::build(om), kQ);
    std::uniform_real_distribution<double> pick(W.phi() + 0.1, W.phi() + 10.0);
    for (int k = 0; k < 5; ++k) {
      const double th = pick(gen);
      double closed = 0.0;
      for (std::size_t i = 0; i < W.roots().size(); ++i) {
        closed += (W.coefficients()[i] / (th - W.roots()[i])).real();
      }
      const double numeric = oracle::integrate_to_infinity(
          [&](double x) { return x > 150.0 ? 0.0 : std::exp(-th * x) * W.W(x); });
      worst = std::max(worst, std::abs(closed - numeric) / std::abs(numeric));
    }
  }
  return {worst <= 1e-8, "max relative gap " + sci(worst) + " (tol 1e-8) over 3 models x 5 theta"};
}

Outcome boundary_behaviour() {
  const pdiv::ScaleFunction bv(oracle::build({0.5, 0.0, 2.0, oracle::exponential(1.0)}), kQ);
  const pdiv::ScaleFunction ubv(oracle::build(kCase1), kQ);
  const double e1 = std::abs(bv.W(0.0) - 1.0 / 0.5);
  const double e2 = std::abs(ubv.W(0.0));
  const double e3 = std::abs(ubv.W_prime(0.0, Side::right) - 2.0 / (0.2 * 0.2)) / (2.0 / 0.04);
  const bool ok = e1 <= 1e-9 && e2 <= 1e-9 && e3 <= 1e-9;
  return {ok, "|W(0)-1/c| " + sci(e1) + ", |W(0)| " + sci(e2) + ", rel |W'(0+)-2/sigma^2| " +
                  sci(e3) + " (tol 1e-9)"};
}

Outcome smooth_fit() {
  const Valuation val(oracle::build(kCase1), ProblemSpec::dividends(kQ, kR, 0.0));
  const auto sol = pdiv::solve_b_star(val);
  const auto rep = pdiv::smooth_fit_report(*val.optimal_value(sol.level), sol.level);
  const Valuation bv(oracle::build(kCase1NoDiffusion), ProblemSpec::dividends(kQ, kR, 0.0));
  const auto sol0 = pdiv::solve_b_star(bv);
  const auto rep0 = pdiv::smooth_fit_report(*bv.optimal_value(sol0.level), sol0.level);
  const bool ok = sol.level > 0.0 && rep.second < 1e-7 && rep.third < 1e-7 && sol0.level > 0.0 &&
                  rep0.second < 1e-7;
  return {ok, "b* " + sci(sol.level) + ", v'' gap " + sci(rep.second) + ", v''' gap " +
                  sci(rep.third) + "; sigma=0: b* " + sci(sol0.level) + ", v'' gap " +
                  sci(rep0.second) + " (tol 1e-7)"};
}

Outcome case_dichotomy() {
  const Valuation c1(oracle::build(kCase1), ProblemSpec::dividends(kQ, kR, 0.0));
  const Valuation c2(oracle::build(kCase2), ProblemSpec::dividends(kQ, kR, 0.0));
  const auto s1 = pdiv::solve_barrier(c1);
  const auto s2 = pdiv::solve_barrier(c2);
  const double f1 = std::abs(pdiv::smoothness_function(c1, s1.level));
  const bool sign2 = c2.psi0() >= pdiv::zero_barrier_threshold(c2);
  const bool ok = sign2 && s2.is_zero && s2.level == 0.0 && !s1.is_zero && s1.level > 0.0 &&
                  f1 <= 1e-10;
  return {ok, "case 2: psi'(0+) " + sci(c2.psi0()) + " vs I " + sci(pdiv::zero_barrier_threshold(c2)) +
                  " -> b* " + sci(s2.level) + "; case 1: b* " + sci(s1.level) + ", |f(b*)| " +
                  sci(f1) + " (tol 1e-10)"};
}

double grid_top(const Valuation& val, double barrier) { return barrier + 5.0 / val.scale().phi_qr(); }

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_generator_gap(const pdiv::HjbReport& rep) {
  double m = 0.0;
  for (std::size_t i = 0; i < rep.grid.size(); ++i) {
    const double ref = rep.closed_form_reference[i];
    m = std::max(m, std::abs(rep.generator_residual[i] - ref) / (1.0 + std::abs(ref)));
  }
  return m;
}

Outcome hjb_dividends() {
  std::string detail;
  bool ok = true;
  for (const auto& [name, om] : {std::pair{"case 1", kCase1}, std::pair{"case 2", kCase2}}) {
    const Valuation val(oracle::build(om), ProblemSpec::dividends(kQ, kR, 0.0));
    const double b = pdiv::solve_barrier(val).level;
    const auto grid = pdiv::hjb_grid(grid_top(val, b), 200);
    const auto rep = pdiv::hjb_check_dividends(val, b, grid);
    const double hjb = max_abs(rep.hjb_value);
    const double gen = max_generator_gap(rep);
    ok = ok && rep.certified && hjb <= 1e-5 && gen <= 1e-6;
    detail += std::string(detail.empty() ? "" : "; ") + name + ": max |HJB| " + sci(hjb) +
              ", generator gap " + sci(gen);
  }
  return {ok, detail + " (tol 1e-5, 1e-6 relative)"};
}

Outcome hjb_bailout() {
  const Valuation val(oracle::build(kCase1), ProblemSpec::bailout(kQ, kR, kBeta));
  const double b = pdiv::solve_barrier(val).level;
  const auto rep = pdiv::hjb_check_bailout(val, b, pdiv::hjb_grid(grid_top(val, b), 200));
  const double hjb = max_abs(rep.hjb_value);
  const double gen = max_generator_gap(rep);
  const double d0 = std::abs(rep.derivative_at_zero - kBeta);
  const bool ok = rep.certified && hjb <= 1e-5 && gen <= 1e-6 && d0 <= 1e-9 &&
                  rep.derivative_bound_ok && rep.concave;
  return {ok, "b_dagger " + sci(b) + ", max |HJB| " + sci(hjb) + ", generator gap " + sci(gen) +
                  ", |u'(0)-beta| " + sci(d0) + ", u'<=beta " +
                  (rep.derivative_bound_ok ? "yes" : "no") + ", concave " +
                  (rep.concave ? "yes" : "no")};
}

Outcome monte_carlo() {
  const auto model = oracle::build(kCase1);
  pdiv::McConfig cfg;
  cfg.paths = 100000;
  bool ok = true;
  double worst = 0.0;  // largest |error| / tolerance
  for (const auto& spec : {ProblemSpec::dividends(kQ, kR, 0.0), ProblemSpec::bailout(kQ, kR, kBeta)}) {
    const Valuation val(model, spec);
    const double b = pdiv::solve_barrier(val).level;
    const auto v = val.optimal_value(b);
    for (double x : {0.5, 1.0, 2.0, 4.0}) {
      const auto est = spec.kind == pdiv::ProblemKind::dividends
                           ? pdiv::simulate_dividends(model, spec, b, x, cfg)
                           : pdiv::simulate_bailout(model, spec, b, x, cfg);
      const double ratio = std::abs(est.mean - v->value(x)) / est.tolerance(3.0);
      worst = std::max(worst, ratio);
      ok = ok && ratio <= 1.0;
    }
  }
  return {ok, "8 comparisons at 1e5 paths, worst |analytic - MC| / (3 se + bias bounds) = " +
                  sci(worst)};
}

Outcome dominance() {
  const auto model = oracle::build(kCase1);
  double worst = 0.0;
  bool ok = true;
  for (const auto& spec : {ProblemSpec::dividends(kQ, kR, 0.0), ProblemSpec::bailout(kQ, kR, kBeta)}) {
    const Valuation val(model, spec);
    const double b = pdiv::solve_barrier(val).level;
    const std::vector<double> alts{0.0, 0.5 * b, 1.5 * b, 2.0 * b};
    const auto grid = pdiv::uniform_grid(0.0, 3.0 * b + 5.0 / val.scale().phi_qr(), 400);
    const auto rep = pdiv::dominance_scan(val, b, alts, grid);
    worst = std::max(worst, rep.worst);
    ok = ok && rep.dominated;
  }
  return {ok, "largest violation " + sci(worst) + " (tol 1e-9) on 400 points, both problems"};
}

Outcome classical_limit() {
  const auto model = oracle::build(kCase1);
  bool ok = true;
  std::string detail;
  for (const auto& spec : {ProblemSpec::dividends(kQ, kR, 0.0), ProblemSpec::bailout(kQ, kR, kBeta)}) {
    const auto rows = pdiv::r_sweep(model, spec, kRates);
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].gap <= rows[i - 1].gap;
    const double gap05 = rows[5].gap, gap5 = rows.back().gap;
    const auto cls = Valuation(model, spec).classical_limit();
    double excess = -INFINITY;
    const auto grid = pdiv::uniform_grid(0.0, cls.barrier + 5.0, 300);
    for (double r : kRates) {
      ProblemSpec s = spec;
      s.r = r;
      const Valuation val(model, s);
      const auto v = val.optimal_value(pdiv::solve_barrier(val).level);
      for (double x : grid) excess = std::max(excess, v->value(x) - cls.curve->value(x));
    }
    ok = ok && monotone && gap5 < gap05 && excess <= 1e-9;
    detail += std::string(detail.empty() ? "" : "; ") + pdiv::to_string(spec.kind) +
              ": gaps nonincreasing " + (monotone ? "yes" : "no") + ", gap(0.5) " + sci(gap05) +
              ", gap(5) " + sci(gap5) + ", max(v - classical) " + sci(excess);
  }
  return {ok, detail};
}

Outcome rho_sweep() {
  const auto model = oracle::build(kCase1);
  double prev = INFINITY;
  bool nonincreasing = true;
  std::string flagged;
  bool largest_flagged = false;
  for (double rho : kRhos) {
    const Valuation val(model, ProblemSpec::dividends(kQ, kR, rho));
    const double b = pdiv::solve_barrier(val).level;
    nonincreasing = nonincreasing && b <= prev;
    prev = b;
    const auto v = val.optimal_value(b);
    const auto grid = pdiv::uniform_grid(0.0, b + 5.0 / val.scale().phi_qr(), 400);
    bool monotone = true;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      monotone = monotone && v->value(grid[i]) >= v->value(grid[i - 1]) - 1e-12;
    }
    if (!monotone) {
      flagged += (flagged.empty() ? "" : ",") + sci(rho);
      if (rho == kRhos.back()) largest_flagged = true;
    }
  }
  return {nonincreasing && largest_flagged,
          std::string("b*(rho) nonincreasing ") + (nonincreasing ? "yes" : "no") +
              ", nonmonotone value at rho = {" + flagged + "}"};
}

Outcome max_term() {
  std::mt19937_64 gen(99);
  double worst = 0.0;  // (closed - brute) / bound
  bool ok = true;
  const int n = 2000;
  for (const auto& spec : {ProblemSpec::dividends(kQ, kR, 0.0), ProblemSpec::bailout(kQ, kR, kBeta)}) {
    const Valuation val(oracle::build(kCase1), spec);
    const double b = pdiv::solve_barrier(val).level;
    const auto v = val.optimal_value(b);
    std::uniform_real_distribution<double> pick(0.0, 3.0 * b + 2.0);
    for (int k = 0; k < 50; ++k) {
      const double x = pick(gen);
      double curvature = 0.0;
      for (int i = 0; i <= 400; ++i) {
        curvature = std::max(curvature, std::abs(v->derivative(x * i / 400.0, 2)));
      }
      // the maximiser is within half a grid step of a grid point
      const double bound = 0.5 * curvature * std::pow(0.5 * x / n, 2) + 1e-12;
      const double closed = pdiv::max_term_closed_form(*v, b, x);
      const double brute = pdiv::max_term_bruteforce(*v, x, n);
      ok = ok && brute <= closed + 1e-12 && closed - brute <= bound;
      worst = std::max(worst, (closed - brute) / bound);
    }
  }
  return {ok, "100 points (50 per problem), worst (closed - dense) / bound = " + sci(worst)};
}

}  // namespace

int main() {
  report(1, "scale-function Laplace identity", 5.0, laplace_identity);
  report(2, "scale-function boundary behaviour", 0.0, boundary_behaviour);
  report(3, "smooth fit at b*", 1.0, smooth_fit);
  report(4, "case dichotomy", 0.0, case_dichotomy);
  report(5, "HJB certification (dividends)", 30.0, hjb_dividends);
  report(6, "HJB certification (bailout)", 0.0, hjb_bailout);
  report(7, "Monte Carlo agreement", 120.0, monte_carlo);
  report(8, "dominance over alternative barriers", 0.0, dominance);
  report(9, "classical limit in r", 0.0, classical_limit);
  report(10, "rho sweep", 0.0, rho_sweep);
  report(11, "closed-form max term vs dense maximisation", 0.0, max_term);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
