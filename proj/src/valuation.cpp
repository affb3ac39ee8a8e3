#include "pdiv/valuation.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "pdiv/errors.hpp"

namespace pdiv {

ProblemSpec ProblemSpec::dividends(double q, double r, double rho) {
  ProblemSpec spec;
  spec.kind = ProblemKind::dividends;
  spec.q = q;
  spec.r = r;
  spec.rho = rho;
  spec.validate();
  return spec;
}

ProblemSpec ProblemSpec::bailout(double q, double r, double beta) {
  ProblemSpec spec;
  spec.kind = ProblemKind::bailout;
  spec.q = q;
  spec.r = r;
  spec.beta = beta;
  spec.validate();
  return spec;
}

void ProblemSpec::validate() const {
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("discount rate q must be positive");
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("decision rate r must be positive");
  if (!std::isfinite(rho)) throw DomainError("terminal payoff rho must be finite");
  if (kind == ProblemKind::bailout && !(beta > 1.0 && std::isfinite(beta))) {
    throw DomainError("injection cost beta must exceed 1");
  }
}

const char* to_string(ProblemKind kind) {
  return kind == ProblemKind::dividends ? "dividends" : "bailout";
}

BarrierCurve::BarrierCurve(std::shared_ptr<const PeriodicScaleFunction> scale, double barrier,
                           double coefficient)
    : scale_(std::move(scale)), barrier_(barrier), coefficient_(coefficient) {
  if (!(barrier >= 0.0)) throw DomainError("barrier must be nonnegative");
}

double BarrierCurve::value(double x) const {
  const double y = barrier_ - x;
  return coefficient_ * scale_->Zqr(y) - scale_->H(y);
}

double BarrierCurve::derivative(double x, int order, Side side) const {
  const double y = barrier_ - x;
  // d/dx = -d/dy, and the right limit in x is the left limit in y.
  const Side ys = side == Side::right ? Side::left : Side::right;
  const auto& s = *scale_;
  switch (order) {
    case 1:
      return -(coefficient_ * s.Zqr_prime(y, ys) - s.H_prime(y));
    case 2:
      return coefficient_ * s.Zqr_second(y, ys) - s.H_second(y, ys);
    case 3:
      return -(coefficient_ * s.Zqr_third(y, ys) - s.H_third(y, ys));
    default:
      throw DomainError("derivative order must be 1, 2 or 3");
  }
}

AffineExpTail BarrierCurve::tail() const {
  const double q = scale_->q();
  const double r = scale_->r();
  const double w = r / (r + q);
  AffineExpTail t;
  t.start = barrier_;
  t.constant = coefficient_ * w - w * (barrier_ + scale_->psi0() / q);
  t.slope = w;
  t.amplitude = coefficient_ * q / (r + q);
  t.rate = scale_->phi_qr();
  return t;
}

ZeroBarrierCurve::ZeroBarrierCurve(double q, double r, double rho, double phi_qr, double psi0)
    : weight_(r / (r + q)), rate_(phi_qr) {
  exp_coeff_ = psi0 / (r + q) + rho * q / r;
  tail_.start = 0.0;
  tail_.constant = -weight_ * (psi0 / (r + q) - rho);
  tail_.slope = weight_;
  tail_.amplitude = weight_ * exp_coeff_;
  tail_.rate = rate_;
}

double ZeroBarrierCurve::value(double x) const { return tail_.value(x); }

double ZeroBarrierCurve::derivative(double x, int order, Side) const {
  const double e = std::exp(-rate_ * x);
  switch (order) {
    case 1:
      return weight_ * (1.0 - rate_ * exp_coeff_ * e);
    case 2:
      return weight_ * rate_ * rate_ * exp_coeff_ * e;
    case 3:
      return -weight_ * rate_ * rate_ * rate_ * exp_coeff_ * e;
    default:
      throw DomainError("derivative order must be 1, 2 or 3");
  }
}

ClassicalCurve::ClassicalCurve(std::shared_ptr<const ScaleFunction> scale, double barrier)
    : scale_(std::move(scale)), barrier_(barrier), psi0_(scale_->model().psi_prime_at_zero()) {}

double ClassicalCurve::value(double x) const {
  return -scale_->Zbar(barrier_ - x) - psi0_ / scale_->q();
}

double ClassicalCurve::derivative(double x, int order, Side side) const {
  const double y = barrier_ - x;
  const Side ys = side == Side::right ? Side::left : Side::right;
  switch (order) {
    case 1:
      return scale_->Z(y);
    case 2:
      return -scale_->q() * scale_->W(y, ys);
    case 3:
      return scale_->q() * scale_->W_prime(y, ys);
    default:
      throw DomainError("derivative order must be 1, 2 or 3");
  }
}

AffineExpTail ClassicalCurve::tail() const {
  AffineExpTail t;
  t.start = barrier_;
  t.constant = -barrier_ - psi0_ / scale_->q();
  t.slope = 1.0;
  return t;
}

Valuation::Valuation(const PhaseTypeLevyModel& model, const ProblemSpec& spec) : spec_(spec) {
  spec_.validate();
  scale_ = std::make_shared<const PeriodicScaleFunction>(ScaleFunction(model, spec_.q), spec_.r);
}

BarrierCurve Valuation::v_b(double b) const {
  if (spec_.kind != ProblemKind::dividends) throw DomainError("v_b needs a dividends problem");
  const double k = (scale_->H(b) + spec_.rho) / scale_->Zqr(b);
  return BarrierCurve(scale_, b, k);
}

BarrierCurve Valuation::u_b(double b) const {
  if (spec_.kind != ProblemKind::bailout) throw DomainError("u_b needs a bailout problem");
  const double q = spec_.q;
  const double r = spec_.r;
  const double k = (r * scale_->base().Z(b) / (r + q) - spec_.beta) / scale_->Zqr_prime(b);
  return BarrierCurve(scale_, b, k);
}

BarrierCurve Valuation::npv(double b) const {
  return spec_.kind == ProblemKind::dividends ? v_b(b) : u_b(b);
}

std::shared_ptr<const SmoothCurve> Valuation::optimal_value(double barrier) const {
  if (spec_.kind == ProblemKind::dividends && barrier == 0.0) {
    return std::make_shared<const ZeroBarrierCurve>(spec_.q, spec_.r, spec_.rho,
                                                    scale_->phi_qr(), psi0());
  }
  return std::make_shared<const BarrierCurve>(scale_, barrier, -1.0 / scale_->phi_qr());
}

NpvComponents Valuation::components(double b, double x) const {
  const auto& s = *scale_;
  NpvComponents out;
  if (spec_.kind == ProblemKind::dividends) {
    const double zb = s.Zqr(b);
    out.dividends = s.H(b) / zb * s.Zqr(b - x) - s.H(b - x);
    out.ruin_transform = s.Zqr(b - x) / zb;
  } else {
    const double q = spec_.q;
    const double r = spec_.r;
    const double ratio = s.Zqr(b - x) / s.Zqr_prime(b);
    out.dividends = r / (r + q) * ratio * s.base().Z(b) - s.H(b - x);
    out.injections = ratio;
  }
  return out;
}

namespace {

// Root of an increasing function g on [0, inf) with g(0) < 0.
template <class F, class D>
double increasing_root(F g, D dg, double scale_hint) {
  double lo = 0.0;
  double hi = scale_hint;
  int doublings = 0;
  while (g(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) throw NumericError("no bracket for increasing root");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) <= 0.0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 4; ++i) {
    const double next = x - g(x) / dg(x);
    if (!(next >= lo && next <= hi)) break;
    x = next;
  }
  return x;
}

}  // namespace

ClassicalSolution Valuation::classical_limit() const {
  auto base = std::make_shared<const ScaleFunction>(scale_->base());
  const double q = spec_.q;
  const double hint = 1.0 / base->phi();
  double barrier = 0.0;
  if (spec_.kind == ProblemKind::dividends) {
    if (!(psi0() < 0.0)) {
      std::ostringstream os;
      os << "classical barrier undefined: psi'(0+) = " << psi0() << " >= 0";
      throw DomainError(os.str());
    }
    const double target = -psi0() / q;
    barrier = increasing_root([&](double b) { return base->Zbar(b) - target; },
                              [&](double b) { return base->Z(b); }, hint);
  } else {
    const double beta = spec_.beta;
    barrier = increasing_root([&](double b) { return base->Z(b) - beta; },
                              [&](double b) { return q * base->W(b); }, hint);
  }
  ClassicalSolution out;
  out.barrier = barrier;
  out.curve = std::make_shared<const ClassicalCurve>(base, barrier);
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  if (points < 1) throw DomainError("grid needs at least one point");
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  for (int i = 0; i < points; ++i) grid[i] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

}  // namespace pdiv
