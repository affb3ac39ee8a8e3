#include "pdiv/barrier_solver.hpp"

#include <cmath>
#include <sstream>

#include "pdiv/errors.hpp"

namespace pdiv {

namespace {

constexpr double kResidualTol = 1e-10;

struct RootResult {
  double x = 0.0;
  int iterations = 0;
};

// Newton from `start`, accepted only if it stays in [0, inf) and converges fast.
template <class F, class D>
std::optional<RootResult> newton_from(F f, D df, double start, double tol) {
  double x = start;
  for (int it = 0; it <= 20; ++it) {
    const double value = f(x);
    if (std::abs(value) <= tol) return RootResult{x, it};
    const double next = x - value / df(x);
    if (!(next >= 0.0) || !std::isfinite(next)) return std::nullopt;
    x = next;
  }
  return std::nullopt;
}

// Root of a strictly increasing f with f(0) < 0 and f -> infinity.
template <class F, class D>
RootResult increasing_root(F f, D df, double initial_hi, double hi_limit, double tol) {
  double lo = 0.0;
  double hi = initial_hi;
  int iterations = 0;
  while (f(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    ++iterations;
    if (hi > hi_limit) {
      std::ostringstream os;
      os << "barrier bracket not found below " << hi_limit;
      throw NumericError(os.str());
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    ++iterations;
    const double value = f(x);
    if (std::abs(value) <= tol) return {x, iterations};
    (value < 0.0 ? lo : hi) = x;
    double next = x - value / df(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, x)) return {next, iterations};
    x = next;
  }
  return {x, iterations};
}

double residual_tolerance(double scale) { return std::min(1e-12 * std::max(1.0, scale), 1e-11); }

}  // namespace

SmoothFitReport smooth_fit_report(const SmoothCurve& curve, double at) {
  SmoothFitReport report;
  if (!(at > 0.0)) return report;
  report.first = std::abs(curve.derivative(at, 1, Side::right) - curve.derivative(at, 1, Side::left));
  report.second =
      std::abs(curve.derivative(at, 2, Side::right) - curve.derivative(at, 2, Side::left));
  report.third = std::abs(curve.derivative(at, 3, Side::right) - curve.derivative(at, 3, Side::left));
  return report;
}

double smoothness_function(const Valuation& val, double b) {
  const auto& s = val.scale();
  const double q = s.q();
  const double r = s.r();
  const double rho = val.spec().rho;
  return s.base().Zbar(b) + s.psi0() / q + (q + r) / r * rho +
         (r + q) / (r * s.phi_qr()) * s.Zqr(b);
}

double smoothness_function_prime(const Valuation& val, double b) {
  const auto& s = val.scale();
  return s.base().Z(b) + s.q() / s.r() * s.J(b);
}

double bailout_smoothness_function(const Valuation& val, double b) {
  return val.scale().Zqr(b) - val.spec().beta;
}

double bailout_smoothness_function_prime(const Valuation& val, double b) {
  return val.scale().Zqr_prime(b);
}

double zero_barrier_threshold(const Valuation& val) {
  const auto& s = val.scale();
  const double q = s.q();
  const double r = s.r();
  return -(q / r) * (q + r) * (val.spec().rho + 1.0 / s.phi_qr());
}

BarrierSolution solve_b_star(const Valuation& val, std::optional<double> start) {
  if (val.spec().kind != ProblemKind::dividends) {
    throw DomainError("solve_b_star needs a dividends problem");
  }
  BarrierSolution out;
  if (!(val.psi0() < zero_barrier_threshold(val))) {
    out.is_zero = true;
    out.level = 0.0;
    out.residual = 0.0;
    return out;
  }
  auto f = [&](double b) { return smoothness_function(val, b); };
  auto df = [&](double b) { return smoothness_function_prime(val, b); };
  const double tol = residual_tolerance(std::abs(val.psi0()) / val.spec().q);
  const double unit = 1.0 / val.scale().base().phi();
  std::optional<RootResult> root;
  if (start) root = newton_from(f, df, *start, tol);
  if (!root) root = increasing_root(f, df, unit, 1e3 * unit, tol);
  out.level = root->x;
  out.iterations = root->iterations;
  out.residual = std::abs(f(out.level));
  if (out.residual > kResidualTol) {
    std::ostringstream os;
    os << "b* residual " << out.residual << " exceeds " << kResidualTol;
    throw NumericError(os.str());
  }
  out.smooth_fit = smooth_fit_report(*val.optimal_value(out.level), out.level);
  return out;
}

BarrierSolution solve_b_dagger(const Valuation& val, std::optional<double> start) {
  if (val.spec().kind != ProblemKind::bailout) {
    throw DomainError("solve_b_dagger needs a bailout problem");
  }
  auto f = [&](double b) { return bailout_smoothness_function(val, b); };
  auto df = [&](double b) { return bailout_smoothness_function_prime(val, b); };
  const double tol = residual_tolerance(val.spec().beta);
  const double unit = 1.0 / val.scale().base().phi();
  std::optional<RootResult> root;
  if (start) root = newton_from(f, df, *start, tol);
  if (!root) root = increasing_root(f, df, unit, 1e3 * unit, tol);
  BarrierSolution out;
  out.level = root->x;
  out.iterations = root->iterations;
  out.residual = std::abs(f(out.level));
  if (out.residual > kResidualTol) {
    std::ostringstream os;
    os << "b-dagger residual " << out.residual << " exceeds " << kResidualTol;
    throw NumericError(os.str());
  }
  out.smooth_fit = smooth_fit_report(*val.optimal_value(out.level), out.level);
  return out;
}

BarrierSolution solve_barrier(const Valuation& val) {
  return val.spec().kind == ProblemKind::dividends ? solve_b_star(val) : solve_b_dagger(val);
}

std::vector<SweepRow> r_sweep(const PhaseTypeLevyModel& model, const ProblemSpec& spec,
                              std::span<const double> r_list) {
  const double classical = Valuation(model, spec).classical_limit().barrier;
  std::vector<SweepRow> rows;
  rows.reserve(r_list.size());
  for (const double r : r_list) {
    ProblemSpec s = spec;
    s.r = r;
    const Valuation val(model, s);
    SweepRow row;
    row.r = r;
    row.solution = solve_barrier(val);
    row.classical_barrier = classical;
    row.gap = std::abs(row.solution.level - classical);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pdiv
