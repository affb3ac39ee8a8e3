#include "pdiv/scale.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "pdiv/errors.hpp"

namespace pdiv {

namespace {

using Poly = std::vector<double>;  // coefficients, lowest degree first

Poly multiply(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// Faddeev-LeVerrier: det(lambda I - T) and alpha adj(lambda I - T) t.
std::pair<Poly, Poly> characteristic_and_adjugate(const PhaseTypeLevyModel& model) {
  const auto& T = model.jumps().T;
  const auto& alpha = model.jumps().alpha;
  const auto& t = model.exit_vector();
  const auto m = T.rows();
  Poly charpoly(m + 1, 0.0);
  Poly adjugate(m, 0.0);
  charpoly[m] = 1.0;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index k = 1; k <= m; ++k) {
    M = T * M + charpoly[m - k + 1] * Eigen::MatrixXd::Identity(m, m);
    adjugate[m - k] = alpha.dot(M * t);
    charpoly[m - k] = -(T * M).trace() / static_cast<double>(k);
  }
  return {charpoly, adjugate};
}

Complex expm1(Complex z) {
  if (std::abs(z) < 1e-5) return z * (1.0 + z * (0.5 + z / 6.0));
  return std::exp(z) - 1.0;
}

// exp(z) - 1 - z
Complex expm1_minus_z(Complex z) {
  if (std::abs(z) < 1e-3) {
    return z * z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z * (1.0 / 120.0 + z / 720.0))));
  }
  return std::exp(z) - 1.0 - z;
}

double psi_scale(const PhaseTypeLevyModel& model, Complex theta, double q) {
  const double a = std::abs(theta);
  return 1.0 + q + model.kappa() + std::abs(model.drift()) * a +
         0.5 * model.sigma() * model.sigma() * a * a;
}

bool resolvent_singular(const PhaseTypeLevyModel& model, Complex theta) {
  if (model.kappa() == 0.0) return false;
  const auto m = model.jumps().phases();
  const Eigen::MatrixXcd A =
      theta * Eigen::MatrixXcd::Identity(m, m) - model.jumps().T.cast<Complex>();
  return Eigen::FullPivLU<Eigen::MatrixXcd>(A).rcond() < 1e-10;
}

}  // namespace

std::vector<Complex> laplace_exponent_roots(const PhaseTypeLevyModel& model, double q) {
  const double half_var = 0.5 * model.sigma() * model.sigma();
  Poly P;
  if (model.kappa() == 0.0) {
    P = {-q, model.drift(), half_var};
  } else {
    auto [charpoly, adjugate] = characteristic_and_adjugate(model);
    P = multiply({-model.kappa() - q, model.drift(), half_var}, charpoly);
    for (std::size_t i = 0; i < adjugate.size(); ++i) P[i] += model.kappa() * adjugate[i];
  }
  while (P.size() > 1 && P.back() == 0.0) P.pop_back();
  const auto degree = static_cast<Eigen::Index>(P.size()) - 1;
  if (degree < 1) throw NumericError("degenerate root polynomial");

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < degree; ++i) companion(i, degree - 1) = -P[i] / P[degree];
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  if (es.info() != Eigen::Success) throw NumericError("companion eigensolver failed");

  std::vector<Complex> roots;
  for (Eigen::Index i = 0; i < degree; ++i) {
    Complex theta = es.eigenvalues()(i);
    // Common zeros of det(theta I - T) and the adjugate term are not roots of psi - q.
    if (resolvent_singular(model, theta)) continue;
    for (int it = 0; it < 60; ++it) {
      const Complex step =
          (model.laplace_exponent(theta) - q) / model.laplace_exponent_derivative(theta);
      theta -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(theta))) break;
    }
    const double residual = std::abs(model.laplace_exponent(theta) - q);
    if (residual > 1e-9 * psi_scale(model, theta, q)) {
      std::ostringstream os;
      os << "root polish failed for psi(theta) = " << q << " near " << theta << " (residual "
         << residual << ")";
      throw NumericError(os.str());
    }
    if (std::abs(theta.imag()) <= 1e-12 * std::abs(theta)) theta.imag(0.0);
    roots.push_back(theta);
  }

  // Enforce exact conjugate pairing so the exponential sums are real.
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i] || roots[i].imag() <= 0.0) continue;
    std::size_t best = roots.size();
    double best_dist = 0.0;
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (used[j] || roots[j].imag() >= 0.0) continue;
      const double d = std::abs(roots[j] - std::conj(roots[i]));
      if (best == roots.size() || d < best_dist) {
        best = j;
        best_dist = d;
      }
    }
    if (best == roots.size() || best_dist > 1e-6 * std::abs(roots[i])) {
      throw NumericError("complex root without conjugate partner");
    }
    roots[best] = std::conj(roots[i]);
    used[i] = used[best] = true;
  }
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (!used[i] && roots[i].imag() != 0.0) {
      throw NumericError("complex root without conjugate partner");
    }
  }
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return roots;
}

ScaleFunction::ScaleFunction(const PhaseTypeLevyModel& model, double q)
    : model_(model), q_(q) {
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("scale function requires q > 0");
  phi_ = model_.phi(q);
  roots_ = laplace_exponent_roots(model_, q);

  double max_abs = 0.0;
  int positive = 0;
  for (auto& theta : roots_) {
    max_abs = std::max(max_abs, std::abs(theta));
    if (theta.real() > 0.0) {
      ++positive;
      if (theta.imag() != 0.0 || std::abs(theta.real() - phi_) > 1e-9 * std::max(1.0, phi_)) {
        throw NumericError("positive root does not match Phi(q)");
      }
      theta = Complex(phi_, 0.0);
    }
  }
  if (positive != 1) {
    std::ostringstream os;
    os << "expected exactly one root with positive real part, found " << positive;
    throw NumericError(os.str());
  }
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    for (std::size_t j = i + 1; j < roots_.size(); ++j) {
      if (std::abs(roots_[i] - roots_[j]) < 1e-6 * max_abs) {
        std::ostringstream os;
        os << "psi(theta) = " << q << " has a near-multiple root at " << roots_[i]
           << "; perturb q";
        throw NumericError(os.str());
      }
    }
  }
  coeffs_.reserve(roots_.size());
  for (const auto& theta : roots_) coeffs_.push_back(1.0 / model_.laplace_exponent_derivative(theta));

  // Partial-fraction identity 1/(psi(theta) - q) = sum A_i / (theta - theta_i).
  const double spacing = std::max(1.0, phi_);
  for (int k = 1; k <= 5; ++k) {
    const double theta = phi_ + 0.37 * k * spacing;
    const double expected = 1.0 / (model_.laplace_exponent(theta) - q);
    const double got = laplace_transform(theta).real();
    if (std::abs(got - expected) > 1e-9 * std::abs(expected)) {
      std::ostringstream os;
      os << "partial-fraction check failed at theta=" << theta << ": " << got << " vs "
         << expected;
      throw NumericError(os.str());
    }
  }
}

Complex ScaleFunction::sum(double x, int power) const {
  Complex total = 0.0;
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    Complex term = coeffs_[i] * std::exp(roots_[i] * x);
    for (int p = 0; p < power; ++p) term *= roots_[i];
    total += term;
  }
  return total;
}

double ScaleFunction::W(double x, Side side) const {
  if (x < 0.0 || (x == 0.0 && side == Side::left)) return 0.0;
  return sum(x, 0).real();
}

double ScaleFunction::W_prime(double x, Side side) const {
  if (x < 0.0 || (x == 0.0 && side == Side::left)) return 0.0;
  return sum(x, 1).real();
}

double ScaleFunction::Wbar(double x) const {
  if (x <= 0.0) return 0.0;
  Complex total = 0.0;
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    total += coeffs_[i] * expm1(roots_[i] * x) / roots_[i];
  }
  return total.real();
}

double ScaleFunction::Z(double x) const { return 1.0 + q_ * Wbar(x); }

double ScaleFunction::Zbar(double x) const {
  if (x <= 0.0) return x;
  Complex total = 0.0;
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    total += coeffs_[i] * expm1_minus_z(roots_[i] * x) / (roots_[i] * roots_[i]);
  }
  return x + q_ * total.real();
}

Complex ScaleFunction::laplace_transform(Complex theta) const {
  Complex total = 0.0;
  for (std::size_t i = 0; i < roots_.size(); ++i) total += coeffs_[i] / (theta - roots_[i]);
  return total;
}

double ScaleFunction::max_imaginary_ratio(double x_max, int points) const {
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const double x = x_max * k / std::max(1, points - 1);
    const Complex s = sum(x, 0);
    if (s.real() == 0.0) continue;
    worst = std::max(worst, std::abs(s.imag()) / std::abs(s.real()));
  }
  return worst;
}

PeriodicScaleFunction::PeriodicScaleFunction(ScaleFunction base, double r)
    : base_(std::move(base)), r_(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("decision rate r must be positive");
  phi_qr_ = base_.model().phi(base_.q() + r_);
  psi0_ = base_.model().psi_prime_at_zero();
  Complex total = 0.0;
  for (std::size_t i = 0; i < base_.roots().size(); ++i) {
    j_coeffs_.push_back(r_ * base_.coefficients()[i] / (phi_qr_ - base_.roots()[i]));
    total += j_coeffs_.back();
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "r * int exp(-Phi(q+r) z) W(z) dz = " << total << ", expected 1";
    throw NumericError(os.str());
  }
}

double PeriodicScaleFunction::J(double x, Side side) const {
  if (x < 0.0 || (x == 0.0 && side == Side::left)) return std::exp(phi_qr_ * x);
  Complex total = 0.0;
  for (std::size_t i = 0; i < j_coeffs_.size(); ++i) {
    total += j_coeffs_[i] * std::exp(base_.roots()[i] * x);
  }
  return total.real();
}

double PeriodicScaleFunction::J_prime(double x, Side side) const {
  if (x < 0.0 || (x == 0.0 && side == Side::left)) return phi_qr_ * std::exp(phi_qr_ * x);
  Complex total = 0.0;
  for (std::size_t i = 0; i < j_coeffs_.size(); ++i) {
    const Complex theta = base_.roots()[i];
    total += j_coeffs_[i] * theta * std::exp(theta * x);
  }
  return total.real();
}

double PeriodicScaleFunction::J_second(double x, Side side) const {
  if (x < 0.0 || (x == 0.0 && side == Side::left)) {
    return phi_qr_ * phi_qr_ * std::exp(phi_qr_ * x);
  }
  Complex total = 0.0;
  for (std::size_t i = 0; i < j_coeffs_.size(); ++i) {
    const Complex theta = base_.roots()[i];
    total += j_coeffs_[i] * theta * theta * std::exp(theta * x);
  }
  return total.real();
}

double PeriodicScaleFunction::Zqr(double x) const {
  const double q = base_.q();
  return (r_ * base_.Z(x) + q * J(x)) / (r_ + q);
}

double PeriodicScaleFunction::Zqr_prime(double x, Side side) const {
  const double q = base_.q();
  return q / (r_ + q) * phi_qr_ * J(x, side);
}

double PeriodicScaleFunction::Zqr_second(double x, Side side) const {
  const double q = base_.q();
  return q / (r_ + q) * phi_qr_ * J_prime(x, side);
}

double PeriodicScaleFunction::Zqr_third(double x, Side side) const {
  const double q = base_.q();
  return q / (r_ + q) * phi_qr_ * J_second(x, side);
}

double PeriodicScaleFunction::H(double y) const {
  const double q = base_.q();
  return r_ / (r_ + q) * (base_.Zbar(y) + psi0_ / q);
}

double PeriodicScaleFunction::H_prime(double y) const {
  return r_ / (r_ + base_.q()) * base_.Z(y);
}

double PeriodicScaleFunction::H_second(double y, Side side) const {
  const double q = base_.q();
  return r_ / (r_ + q) * q * base_.W(y, side);
}

double PeriodicScaleFunction::H_third(double y, Side side) const {
  const double q = base_.q();
  return r_ / (r_ + q) * q * base_.W_prime(y, side);
}

}  // namespace pdiv
