#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace pdiv {

using Complex = std::complex<double>;

// Phase-type law (m, alpha, T): absorption time of a Markov chain with
// initial distribution alpha over m transient states and sub-generator T.
struct PhaseTypeLaw {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd T;

  int phases() const { return static_cast<int>(alpha.size()); }
  // t = -T 1
  Eigen::VectorXd exit_vector() const;
};

// Throws DomainError when alpha is not a probability vector or T is not a
// proper sub-generator.
void validate(const PhaseTypeLaw& law);

// Moment-matched stand-in for |N(0,1)|: a two-phase hypoexponential law with
// mean sqrt(2/pi) and second moment 1. Not a reproduction of any published
// six-phase fit.
PhaseTypeLaw folded_normal_phase_fit();

// Exp(rate) as a one-phase law.
PhaseTypeLaw exponential_law(double rate);

// Spectrally positive Levy process
//   X(t) - X(0) = -c t + sigma B(t) + sum_{n <= N(t)} Z_n,
// with N a Poisson process of rate kappa and Z_n i.i.d. phase-type.
// Immutable after construction.
class PhaseTypeLevyModel {
 public:
  PhaseTypeLevyModel(double c, double sigma, double kappa, PhaseTypeLaw jumps);

  double drift() const { return c_; }
  double sigma() const { return sigma_; }
  double kappa() const { return kappa_; }
  const PhaseTypeLaw& jumps() const { return jumps_; }
  const Eigen::VectorXd& exit_vector() const { return exit_; }
  bool bounded_variation() const { return sigma_ == 0.0; }

  double mean_jump() const { return mean_jump_; }
  double second_moment_jump() const;

  // psi(theta) = c theta + sigma^2 theta^2 / 2 + kappa (alpha (theta I - T)^{-1} t - 1).
  // Throws DomainError when theta is (numerically) an eigenvalue of T.
  Complex laplace_exponent(Complex theta) const;
  double laplace_exponent(double theta) const;
  Complex laplace_exponent_derivative(Complex theta) const;
  double laplace_exponent_derivative(double theta) const;

  // psi'(0+) = c - kappa E[Z]; E[X(1)] = -psi'(0+).
  double psi_prime_at_zero() const { return c_ - kappa_ * mean_jump_; }

  // Largest root of psi(lambda) = q, q > 0.
  double phi(double q) const;

  // f_Z(z) = alpha exp(T z) t for z >= 0.
  double jump_density(double z) const;
  // P(Z > z) = alpha exp(T z) 1.
  double jump_survival(double z) const;
  // Integral of z f_Z(z) over (a, inf).
  double jump_partial_mean(double a) const;
  // Integral of exp(-lambda z) f_Z(z) over (a, inf), lambda >= 0.
  double jump_partial_laplace(double lambda, double a) const;
  // Smallest z with P(Z > z) < mass.
  double jump_tail_cutoff(double mass) const;

 private:
  Eigen::MatrixXd expm(double z) const;

  double c_;
  double sigma_;
  double kappa_;
  PhaseTypeLaw jumps_;
  Eigen::VectorXd exit_;
  double mean_jump_;
  // exp(T z) = V diag(exp(lambda z)) V^{-1} when T is well-conditioned
  // diagonalizable; otherwise exp is evaluated by Pade scaling-and-squaring.
  struct Spectral {
    Eigen::VectorXcd rates;
    Eigen::VectorXcd density_weights;   // f_Z(z) = sum w_j exp(lambda_j z)
    Eigen::VectorXcd survival_weights;  // P(Z > z) = sum s_j exp(lambda_j z)
  };
  std::optional<Spectral> spectral_;
};

}  // namespace pdiv
