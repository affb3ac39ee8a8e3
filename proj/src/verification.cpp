#include "pdiv/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pdiv/errors.hpp"

namespace pdiv {

namespace {

constexpr double kTailMass = 1e-12;
constexpr double kQuadratureRelTol = 1e-8;

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

// (L - q) g for the smooth-fit value curve at barrier b > 0.
double generator_reference_positive(const PeriodicScaleFunction& s, double b, double x) {
  if (x <= b) return 0.0;
  const double q = s.q();
  const double r = s.r();
  const double phi = s.phi_qr();
  return q * r / (r + q) * ((b - x) + (1.0 - std::exp(phi * (b - x))) / phi);
}

// (L - q) v_0 for the take-the-money-and-run value.
double generator_reference_zero(const PeriodicScaleFunction& s, double rho, double x) {
  const double q = s.q();
  const double r = s.r();
  const double phi = s.phi_qr();
  return r / (r + q) *
         (-(r * s.psi0() / (r + q) + q * rho) * (1.0 - std::exp(-phi * x)) - q * x);
}

std::string describe(const char* what, double x, double got, double want) {
  std::ostringstream os;
  os.precision(12);
  os << what << " at x=" << x << ": " << got << " vs " << want;
  return os.str();
}

}  // namespace

GeneratorEvaluation evaluate_generator(const PhaseTypeLevyModel& model, const SmoothCurve& g,
                                       double x) {
  GeneratorEvaluation out;
  const double gx = g.value(x);
  const double sigma = model.sigma();
  out.value = -model.drift() * g.derivative(x, 1);
  if (sigma > 0.0) out.value += 0.5 * sigma * sigma * g.derivative(x, 2);
  if (model.kappa() == 0.0) return out;

  const AffineExpTail tail = g.tail();
  const double kink = tail.start - x;
  const double cut = std::max(model.jump_tail_cutoff(kTailMass), kink);
  auto integrand = [&](double z) { return (g.value(x + z) - gx) * model.jump_density(z); };

  double integral = 0.0;
  double error = 0.0;
  double l1 = 0.0;
  auto piece = [&](double a, double b) {
    if (!(b > a)) return;
    double err = 0.0;
    double abs_int = 0.0;
    integral += Kronrod::integrate(integrand, a, b, 15, 1e-13, &err, &abs_int);
    error += err;
    l1 += abs_int;
  };
  if (kink > 0.0 && kink < cut) {
    piece(0.0, kink);
    piece(kink, cut);
  } else {
    piece(0.0, cut);
  }
  if (error > kQuadratureRelTol * l1 + 1e-15) {
    std::ostringstream os;
    os << "generator quadrature at x=" << x << " reached error " << error << " (|integral| "
       << l1 << ")";
    throw NumericError(os.str());
  }
  // Exact tail beyond the cut, where g(x + z) follows its affine-plus-exponential form.
  const double survival = model.jump_survival(cut);
  integral += (tail.constant + tail.slope * x - gx) * survival +
              tail.slope * model.jump_partial_mean(cut);
  if (tail.amplitude != 0.0) {
    integral += tail.amplitude * std::exp(-tail.rate * (x - tail.start)) *
                model.jump_partial_laplace(tail.rate, cut);
  }
  out.jump_integral = integral;
  out.error_estimate = error;
  out.value += model.kappa() * integral;
  return out;
}

double apply_generator(const PhaseTypeLevyModel& model, const SmoothCurve& g, double x) {
  return evaluate_generator(model, g, x).value;
}

double max_term_closed_form(const SmoothCurve& g, double barrier, double x) {
  if (x <= barrier) return 0.0;
  return x - barrier + g.value(barrier) - g.value(x);
}

double max_term_bruteforce(const SmoothCurve& g, double x, int n) {
  const double gx = g.value(x);
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n; ++k) {
    const double l = x * k / n;
    best = std::max(best, l + g.value(x - l) - gx);
  }
  return best;
}

std::vector<double> hjb_grid(double x_max, int points) {
  return uniform_grid(1e-4, x_max, points);
}

namespace {

HjbReport hjb_core(const Valuation& val, const SmoothCurve& curve, double barrier,
                   std::span<const double> grid, bool zero_dividend_barrier) {
  const auto& s = val.scale();
  const double q = s.q();
  const double r = s.r();
  HjbReport rep;
  rep.grid.assign(grid.begin(), grid.end());
  for (const double x : grid) {
    const double v = curve.value(x);
    const double gen = apply_generator(val.model(), curve, x) - q * v;
    const double ref = zero_dividend_barrier ? generator_reference_zero(s, val.spec().rho, x)
                                             : generator_reference_positive(s, barrier, x);
    const double max_term = r * max_term_closed_form(curve, barrier, x);
    const double hjb = gen + max_term;
    rep.value.push_back(v);
    rep.generator_residual.push_back(gen);
    rep.closed_form_reference.push_back(ref);
    rep.max_term.push_back(max_term);
    rep.hjb_value.push_back(hjb);
    if (std::abs(gen - ref) > rep.generator_tol * (1.0 + std::abs(ref))) {
      rep.failures.push_back(describe("generator vs closed form", x, gen, ref));
    }
    if (std::abs(hjb) > rep.hjb_tol) rep.failures.push_back(describe("HJB equation", x, hjb, 0.0));
  }
  return rep;
}

}  // namespace

HjbReport hjb_check_dividends(const Valuation& val, double b_star, std::span<const double> grid) {
  if (val.spec().kind != ProblemKind::dividends) {
    throw DomainError("hjb_check_dividends needs a dividends problem");
  }
  const auto curve = val.optimal_value(b_star);
  HjbReport rep = hjb_core(val, *curve, b_star, grid, b_star == 0.0);
  const double v0 = curve->value(0.0);
  if (std::abs(v0 - val.spec().rho) > 1e-9 * (1.0 + std::abs(val.spec().rho))) {
    rep.failures.push_back(describe("boundary value v(0+)", 0.0, v0, val.spec().rho));
  }
  rep.certified = rep.failures.empty();
  return rep;
}

HjbReport hjb_check_bailout(const Valuation& val, double b_dagger, std::span<const double> grid) {
  if (val.spec().kind != ProblemKind::bailout) {
    throw DomainError("hjb_check_bailout needs a bailout problem");
  }
  const double beta = val.spec().beta;
  const auto curve = val.optimal_value(b_dagger);
  HjbReport rep = hjb_core(val, *curve, b_dagger, grid, false);
  rep.derivative_at_zero = curve->derivative(0.0, 1, Side::right);
  if (std::abs(rep.derivative_at_zero - beta) > 1e-9) {
    rep.failures.push_back(describe("u'(0)", 0.0, rep.derivative_at_zero, beta));
  }
  const double u0 = curve->value(0.0);
  double previous_slope = std::numeric_limits<double>::infinity();
  for (const double x : grid) {
    const double slope = curve->derivative(x, 1);
    if (slope > beta * (1.0 + 1e-12)) {
      rep.derivative_bound_ok = false;
      rep.failures.push_back(describe("u'(x) <= beta", x, slope, beta));
    }
    if (slope > previous_slope + 1e-12) {
      rep.concave = false;
      rep.failures.push_back(describe("concavity (u' nonincreasing)", x, slope, previous_slope));
    }
    previous_slope = slope;
    if (curve->value(x) < u0 - 1e-12 * (1.0 + std::abs(u0))) {
      rep.bounded_below = false;
      rep.failures.push_back(describe("u(x) >= u(0)", x, curve->value(x), u0));
    }
  }
  rep.certified = rep.failures.empty();
  return rep;
}

DominanceReport dominance_scan(const Valuation& val, double barrier,
                               std::span<const double> alt_barriers,
                               std::span<const double> x_grid) {
  const auto optimal = val.optimal_value(barrier);
  std::vector<double> best(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) best[i] = optimal->value(x_grid[i]);
  DominanceReport rep;
  for (const double b : alt_barriers) {
    const BarrierCurve alt = val.npv(b);
    double worst = 0.0;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      worst = std::max(worst, alt.value(x_grid[i]) - best[i]);
    }
    rep.alternatives.push_back(b);
    rep.max_violation.push_back(worst);
    rep.worst = std::max(rep.worst, worst);
  }
  rep.dominated = rep.worst <= rep.tolerance;
  return rep;
}

}  // namespace pdiv
