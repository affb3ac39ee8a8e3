#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pdiv/valuation.hpp"

namespace pdiv {

// One-sided derivative gaps |g^(k)(b+) - g^(k)(b-)| of a value curve at b.
struct SmoothFitReport {
  double first = 0.0;
  double second = 0.0;
  double third = 0.0;
};

SmoothFitReport smooth_fit_report(const SmoothCurve& curve, double at);

struct BarrierSolution {
  double level = 0.0;
  bool is_zero = false;   // take-the-money-and-run (dividends only)
  double residual = 0.0;  // |f(level)| or |f_hat(level)|
  int iterations = 0;
  SmoothFitReport smooth_fit;
};

// f(b) = Zbar(b) + psi'(0+)/q + (q+r)/r rho + (r+q)/(r Phi(q+r)) Zqr(b); its root
// is the barrier at which v_b gains one degree of smoothness.
double smoothness_function(const Valuation& val, double b);
double smoothness_function_prime(const Valuation& val, double b);

// f_hat(b) = Zqr(b) - beta, the bailout counterpart.
double bailout_smoothness_function(const Valuation& val, double b);
double bailout_smoothness_function_prime(const Valuation& val, double b);

// I_{r,q} = -(q/r)(q+r)(rho + 1/Phi(q+r)); a positive dividends barrier exists
// iff psi'(0+) < I_{r,q}.
double zero_barrier_threshold(const Valuation& val);

// Optional `start` runs safeguarded Newton from that level first.
BarrierSolution solve_b_star(const Valuation& val, std::optional<double> start = std::nullopt);
BarrierSolution solve_b_dagger(const Valuation& val, std::optional<double> start = std::nullopt);
BarrierSolution solve_barrier(const Valuation& val);

struct SweepRow {
  double r = 0.0;
  BarrierSolution solution;
  double classical_barrier = 0.0;
  double gap = 0.0;  // |barrier(r) - classical barrier|
};

// Barriers over a list of decision rates, compared with the classical barrier.
std::vector<SweepRow> r_sweep(const PhaseTypeLevyModel& model, const ProblemSpec& spec,
                              std::span<const double> r_list);

}  // namespace pdiv
