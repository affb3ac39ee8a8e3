#pragma once

#include <vector>

#include "pdiv/levy_model.hpp"

namespace pdiv {

// Which one-sided limit to take when a function is evaluated at a kink.
// Only matters at the argument 0, where W and its derivatives jump.
enum class Side { left, right };

// W^(q) of the dual (spectrally negative) process -X in partial-fraction form
//   W(x) = sum_i A_i exp(theta_i x),  A_i = 1 / psi'(theta_i),  x >= 0,
// where theta_i run over the roots of psi(theta) = q. W vanishes on x < 0.
// The associated W-bar, Z and Z-bar are evaluated in closed form from the
// same exponential sum.
class ScaleFunction {
 public:
  // Throws NumericError when psi(theta) = q has (near-)multiple roots or the
  // partial-fraction identity cannot be confirmed.
  ScaleFunction(const PhaseTypeLevyModel& model, double q);

  double q() const { return q_; }
  double phi() const { return phi_; }
  const PhaseTypeLevyModel& model() const { return model_; }
  const std::vector<Complex>& roots() const { return roots_; }
  const std::vector<Complex>& coefficients() const { return coeffs_; }

  double W(double x, Side side = Side::right) const;
  double W_prime(double x, Side side = Side::right) const;
  double Wbar(double x) const;
  double Z(double x) const;
  double Zbar(double x) const;

  // sum_i A_i / (theta - theta_i), the Laplace transform of W.
  Complex laplace_transform(Complex theta) const;

  // Largest |Im| / |Re| ratio of the exponential sum over a grid on [0, x_max].
  double max_imaginary_ratio(double x_max, int points) const;

 private:
  Complex sum(double x, int power) const;

  PhaseTypeLevyModel model_;
  double q_;
  double phi_;
  std::vector<Complex> roots_;
  std::vector<Complex> coeffs_;
};

// All roots of psi(theta) = q, found from the polynomial
// (psi(theta) - q) det(theta I - T) and polished by Newton on psi itself.
std::vector<Complex> laplace_exponent_roots(const PhaseTypeLevyModel& model, double q);

// Periodic-observation extensions at decision rate r:
//   J(x)   = exp(Phi(q+r) x) (1 - r int_0^x exp(-Phi(q+r) z) W(z) dz),
//   Zqr(x) = (r Z(x) + q J(x)) / (r + q),
//   H(y)   = r/(r+q) (Zbar(y) + psi'(0+)/q).
// For x >= 0, J is evaluated as r sum_i A_i exp(theta_i x) / (Phi(q+r) - theta_i),
// which equals the defining expression because r sum_i A_i / (Phi(q+r) - theta_i) = 1.
class PeriodicScaleFunction {
 public:
  PeriodicScaleFunction(ScaleFunction base, double r);

  const ScaleFunction& base() const { return base_; }
  double q() const { return base_.q(); }
  double r() const { return r_; }
  double phi_qr() const { return phi_qr_; }
  double psi0() const { return psi0_; }

  double J(double x, Side side = Side::right) const;
  double J_prime(double x, Side side = Side::right) const;
  double J_second(double x, Side side = Side::right) const;

  double Zqr(double x) const;
  double Zqr_prime(double x, Side side = Side::right) const;
  double Zqr_second(double x, Side side = Side::right) const;
  double Zqr_third(double x, Side side = Side::right) const;

  double H(double y) const;
  double H_prime(double y) const;
  double H_second(double y, Side side = Side::right) const;
  double H_third(double y, Side side = Side::right) const;

 private:
  ScaleFunction base_;
  double r_;
  double phi_qr_;
  double psi0_;
  std::vector<Complex> j_coeffs_;
};

}  // namespace pdiv
