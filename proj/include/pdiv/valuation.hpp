#pragma once

#include <memory>
#include <vector>

#include "pdiv/curve.hpp"
#include "pdiv/scale.hpp"

namespace pdiv {

enum class ProblemKind { dividends, bailout };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::dividends;
  double q = 0.05;
  double r = 0.1;
  double rho = 0.0;   // terminal payoff at ruin (dividends)
  double beta = 2.0;  // cost per unit of injected capital (bailout)

  static ProblemSpec dividends(double q, double r, double rho);
  static ProblemSpec bailout(double q, double r, double beta);
  void validate() const;
};

const char* to_string(ProblemKind kind);

// g(x) = K Zqr(b - x) - H(b - x). Every expected NPV of a periodic barrier
// strategy has this shape; only the coefficient K depends on the problem.
class BarrierCurve final : public SmoothCurve {
 public:
  BarrierCurve(std::shared_ptr<const PeriodicScaleFunction> scale, double barrier,
               double coefficient);

  double barrier() const { return barrier_; }
  double coefficient() const { return coefficient_; }

  double value(double x) const override;
  double derivative(double x, int order, Side side = Side::right) const override;
  AffineExpTail tail() const override;

 private:
  std::shared_ptr<const PeriodicScaleFunction> scale_;
  double barrier_;
  double coefficient_;
};

// Take-the-money-and-run value v_0 in its explicit affine-plus-exponential form.
class ZeroBarrierCurve final : public SmoothCurve {
 public:
  ZeroBarrierCurve(double q, double r, double rho, double phi_qr, double psi0);

  double value(double x) const override;
  double derivative(double x, int order, Side side = Side::right) const override;
  AffineExpTail tail() const override { return tail_; }

 private:
  double weight_;  // r / (r + q)
  double rate_;    // Phi(q + r)
  double exp_coeff_;
  AffineExpTail tail_;
};

// Continuous-payment reference -Zbar(b - x) - psi'(0+)/q.
class ClassicalCurve final : public SmoothCurve {
 public:
  ClassicalCurve(std::shared_ptr<const ScaleFunction> scale, double barrier);

  double barrier() const { return barrier_; }
  double value(double x) const override;
  double derivative(double x, int order, Side side = Side::right) const override;
  AffineExpTail tail() const override;

 private:
  std::shared_ptr<const ScaleFunction> scale_;
  double barrier_;
  double psi0_;
};

struct ClassicalSolution {
  double barrier = 0.0;
  std::shared_ptr<const ClassicalCurve> curve;
};

// Expected discounted components of a barrier strategy started at x.
struct NpvComponents {
  double dividends = 0.0;
  double ruin_transform = 0.0;  // E[exp(-q tau)] (dividends problem)
  double injections = 0.0;      // E[int exp(-q t) dR] (bailout problem)
};

// Closed-form NPVs for one (model, problem) pair.
class Valuation {
 public:
  Valuation(const PhaseTypeLevyModel& model, const ProblemSpec& spec);

  const ProblemSpec& spec() const { return spec_; }
  const PhaseTypeLevyModel& model() const { return scale_->base().model(); }
  const PeriodicScaleFunction& scale() const { return *scale_; }
  std::shared_ptr<const PeriodicScaleFunction> scale_ptr() const { return scale_; }
  double psi0() const { return scale_->psi0(); }

  // v_b for the dividends problem, u_b for the bailout problem.
  BarrierCurve npv(double b) const;
  BarrierCurve v_b(double b) const;
  BarrierCurve u_b(double b) const;

  // Value at the smooth-fit barrier: -H(b - x) - Zqr(b - x)/Phi(q+r) for a
  // positive barrier, the explicit v_0 form for a zero dividends barrier.
  std::shared_ptr<const SmoothCurve> optimal_value(double barrier) const;

  NpvComponents components(double b, double x) const;

  // Barrier and value of the continuously-paying counterpart (r -> infinity).
  ClassicalSolution classical_limit() const;

 private:
  ProblemSpec spec_;
  std::shared_ptr<const PeriodicScaleFunction> scale_;
};

std::vector<double> uniform_grid(double lo, double hi, int points);

}  // namespace pdiv
