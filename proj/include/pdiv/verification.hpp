#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdiv/valuation.hpp"

namespace pdiv {

struct GeneratorEvaluation {
  double value = 0.0;           // L g(x)
  double jump_integral = 0.0;   // int (g(x+z) - g(x)) f_Z(z) dz
  double error_estimate = 0.0;  // quadrature error of the jump integral
};

// L g(x) = -c g'(x) + sigma^2/2 g''(x) + kappa int_0^inf (g(x+z) - g(x)) f_Z(z) dz.
// The integral is adaptive Gauss-Kronrod up to the point where the jump tail
// mass drops below 1e-12 (and past the curve's kink), then exact through the
// curve's affine-plus-exponential tail. Throws NumericError when the
// quadrature misses 1e-8 relative accuracy.
GeneratorEvaluation evaluate_generator(const PhaseTypeLevyModel& model, const SmoothCurve& g,
                                       double x);
double apply_generator(const PhaseTypeLevyModel& model, const SmoothCurve& g, double x);

// max_{0 <= l <= x} {l + g(x - l) - g(x)} in the closed form valid for a
// concave-above / slope-one-at-barrier value curve.
double max_term_closed_form(const SmoothCurve& g, double barrier, double x);
// Same maximum over the grid l = 0, x/n, ..., x.
double max_term_bruteforce(const SmoothCurve& g, double x, int n);

struct HjbReport {
  std::vector<double> grid;
  std::vector<double> value;
  std::vector<double> generator_residual;     // (L - q) g(x) by quadrature
  std::vector<double> closed_form_reference;  // analytic (L - q) g(x)
  std::vector<double> max_term;               // r * max_l {...}
  std::vector<double> hjb_value;              // generator_residual + max_term
  double generator_tol = 1e-6;  // |quadrature - reference| <= tol * (1 + |reference|)
  double hjb_tol = 1e-5;
  // bailout side conditions
  double derivative_at_zero = 0.0;
  bool derivative_bound_ok = true;  // g'(x) <= beta on the grid
  bool concave = true;
  bool bounded_below = true;
  bool certified = false;
  std::vector<std::string> failures;
};

// Grid for HJB checks: uniform on [1e-4, x_max].
std::vector<double> hjb_grid(double x_max, int points);

HjbReport hjb_check_dividends(const Valuation& val, double b_star, std::span<const double> grid);
HjbReport hjb_check_bailout(const Valuation& val, double b_dagger, std::span<const double> grid);

struct DominanceReport {
  std::vector<double> alternatives;
  std::vector<double> max_violation;  // max_x (alt(x) - optimal(x))^+
  double worst = 0.0;
  double tolerance = 1e-9;
  bool dominated = true;
};

DominanceReport dominance_scan(const Valuation& val, double barrier,
                               std::span<const double> alt_barriers,
                               std::span<const double> x_grid);

}  // namespace pdiv
