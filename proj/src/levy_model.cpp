#include "pdiv/levy_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "pdiv/errors.hpp"

namespace pdiv {

namespace {

constexpr double kProbabilityTol = 1e-10;
// exp(lambda z) underflows below this exponent; densities are clamped to 0.
constexpr double kUnderflowExponent = -745.0;
// Eigenvector matrices with a larger condition number fall back to Pade.
constexpr double kMaxEigenvectorCondition = 1e8;

}  // namespace

Eigen::VectorXd PhaseTypeLaw::exit_vector() const {
  return -(T * Eigen::VectorXd::Ones(T.rows()));
}

void validate(const PhaseTypeLaw& law) {
  const auto m = law.alpha.size();
  if (m < 1) throw DomainError("phase-type law needs at least one phase");
  if (law.T.rows() != m || law.T.cols() != m) {
    std::ostringstream os;
    os << "phase-type T must be " << m << "x" << m << ", got " << law.T.rows() << "x"
       << law.T.cols();
    throw DomainError(os.str());
  }
  if ((law.alpha.array() < 0.0).any() || !law.alpha.allFinite()) {
    throw DomainError("phase-type alpha has negative or non-finite entries");
  }
  if (std::abs(law.alpha.sum() - 1.0) > kProbabilityTol) {
    throw DomainError("phase-type alpha must sum to 1");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(law.T(i, i) < 0.0)) throw DomainError("phase-type T needs strictly negative diagonal");
    double row = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j && law.T(i, j) < 0.0) {
        throw DomainError("phase-type T has a negative off-diagonal entry");
      }
      row += law.T(i, j);
    }
    if (row > 1e-12 * std::abs(law.T(i, i))) {
      throw DomainError("phase-type T has a positive row sum");
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(law.T, false);
  if ((es.eigenvalues().real().array() >= 0.0).any()) {
    throw DomainError("phase-type T must have eigenvalues with negative real part");
  }
}

PhaseTypeLaw folded_normal_phase_fit() {
  // Z = E1 + E2 with independent exponential stages of means a, b:
  //   a + b = mu, a^2 + b^2 = 1 - mu^2.
  const double mu = std::sqrt(2.0 / std::numbers::pi);
  const double product = (2.0 * mu * mu - 1.0) / 2.0;
  const double disc = std::sqrt(mu * mu - 4.0 * product);
  const double a = 0.5 * (mu + disc);
  const double b = 0.5 * (mu - disc);
  PhaseTypeLaw law;
  law.alpha = Eigen::Vector2d(1.0, 0.0);
  law.T.resize(2, 2);
  law.T << -1.0 / a, 1.0 / a, 0.0, -1.0 / b;
  return law;
}

PhaseTypeLaw exponential_law(double rate) {
  if (!(rate > 0.0)) throw DomainError("exponential rate must be positive");
  PhaseTypeLaw law;
  law.alpha = Eigen::VectorXd::Ones(1);
  law.T = Eigen::MatrixXd::Constant(1, 1, -rate);
  return law;
}

PhaseTypeLevyModel::PhaseTypeLevyModel(double c, double sigma, double kappa, PhaseTypeLaw jumps)
    : c_(c), sigma_(sigma), kappa_(kappa), jumps_(std::move(jumps)) {
  if (!std::isfinite(c_) || !std::isfinite(sigma_) || !std::isfinite(kappa_)) {
    throw DomainError("model parameters must be finite");
  }
  if (sigma_ < 0.0) throw DomainError("sigma must be nonnegative");
  if (kappa_ < 0.0) throw DomainError("kappa must be nonnegative");
  if (!(c_ > 0.0) && !(sigma_ > 0.0)) {
    throw DomainError("process has monotone paths: need c > 0 or sigma > 0");
  }
  validate(jumps_);
  exit_ = jumps_.exit_vector();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(jumps_.phases());
  mean_jump_ = jumps_.alpha.dot(jumps_.T.partialPivLu().solve(-ones));
  if (!(mean_jump_ > 0.0) || !std::isfinite(mean_jump_)) {
    throw DomainError("jump law must have finite positive mean");
  }

  Eigen::EigenSolver<Eigen::MatrixXd> es(jumps_.T);
  if (es.info() == Eigen::Success) {
    const Eigen::MatrixXcd V = es.eigenvectors();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (std::isfinite(cond) && cond < kMaxEigenvectorCondition) {
      const Eigen::MatrixXcd Vinv = V.inverse();
      const Eigen::RowVectorXcd left = jumps_.alpha.transpose().cast<Complex>() * V;
      const Eigen::VectorXcd right_t = Vinv * exit_.cast<Complex>();
      const Eigen::VectorXcd right_1 = Vinv * ones.cast<Complex>();
      Spectral s;
      s.rates = es.eigenvalues();
      s.density_weights = left.transpose().cwiseProduct(right_t);
      s.survival_weights = left.transpose().cwiseProduct(right_1);
      spectral_ = std::move(s);
    }
  }
}

double PhaseTypeLevyModel::second_moment_jump() const {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(jumps_.phases());
  const auto lu = jumps_.T.partialPivLu();
  return 2.0 * jumps_.alpha.dot(lu.solve(lu.solve(ones)));
}

Complex PhaseTypeLevyModel::laplace_exponent(Complex theta) const {
  Complex value = c_ * theta + 0.5 * sigma_ * sigma_ * theta * theta;
  if (kappa_ == 0.0) return value;
  const auto m = jumps_.phases();
  const Eigen::MatrixXcd A =
      theta * Eigen::MatrixXcd::Identity(m, m) - jumps_.T.cast<Complex>();
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  if (lu.rcond() < 1e-14) {
    throw DomainError("Laplace exponent evaluated at an eigenvalue of T");
  }
  const Complex transform =
      jumps_.alpha.cast<Complex>().dot(lu.solve(exit_.cast<Complex>()));
  return value + kappa_ * (transform - 1.0);
}

double PhaseTypeLevyModel::laplace_exponent(double theta) const {
  return laplace_exponent(Complex(theta, 0.0)).real();
}

Complex PhaseTypeLevyModel::laplace_exponent_derivative(Complex theta) const {
  Complex value = c_ + sigma_ * sigma_ * theta;
  if (kappa_ == 0.0) return value;
  const auto m = jumps_.phases();
  const Eigen::MatrixXcd A =
      theta * Eigen::MatrixXcd::Identity(m, m) - jumps_.T.cast<Complex>();
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  if (lu.rcond() < 1e-14) {
    throw DomainError("Laplace exponent evaluated at an eigenvalue of T");
  }
  const Eigen::VectorXcd once = lu.solve(exit_.cast<Complex>());
  const Eigen::VectorXcd twice = lu.solve(once);
  return value - kappa_ * jumps_.alpha.cast<Complex>().dot(twice);
}

double PhaseTypeLevyModel::laplace_exponent_derivative(double theta) const {
  return laplace_exponent_derivative(Complex(theta, 0.0)).real();
}

double PhaseTypeLevyModel::phi(double q) const {
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("phi requires q > 0");
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (laplace_exponent(hi) <= q) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1000) {
      std::ostringstream os;
      os << "phi(" << q << "): no upper bracket found, last bracket [" << lo << ", " << hi << "]";
      throw NumericError(os.str());
    }
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (laplace_exponent(mid) <= q ? lo : hi) = mid;
  }
  double theta = 0.5 * (lo + hi);
  for (int i = 0; i < 5; ++i) {
    const double step = (laplace_exponent(theta) - q) / laplace_exponent_derivative(theta);
    const double next = theta - step;
    if (!(next > 0.0) || !std::isfinite(next)) break;
    theta = next;
    if (std::abs(step) <= 1e-16 * theta) break;
  }
  const double residual = std::abs(laplace_exponent(theta) - q);
  if (residual > 1e-12 * std::max(1.0, q)) {
    std::ostringstream os;
    os << "phi(" << q << "): residual " << residual << " at theta=" << theta << ", bracket ["
       << lo << ", " << hi << "]";
    throw NumericError(os.str());
  }
  return theta;
}

Eigen::MatrixXd PhaseTypeLevyModel::expm(double z) const {
  const Eigen::MatrixXd scaled = jumps_.T * z;
  return scaled.exp();
}

namespace {

double exp_sum(const Eigen::VectorXcd& weights, const Eigen::VectorXcd& rates, double z) {
  Complex total = 0.0;
  for (Eigen::Index j = 0; j < rates.size(); ++j) {
    const Complex e = rates(j) * z;
    if (e.real() < kUnderflowExponent) continue;
    total += weights(j) * std::exp(e);
  }
  return total.real();
}

}  // namespace

double PhaseTypeLevyModel::jump_density(double z) const {
  if (z < 0.0) return 0.0;
  if (spectral_) return std::max(0.0, exp_sum(spectral_->density_weights, spectral_->rates, z));
  return std::max(0.0, jumps_.alpha.dot(expm(z) * exit_));
}

double PhaseTypeLevyModel::jump_survival(double z) const {
  if (z <= 0.0) return 1.0;
  if (spectral_) return std::max(0.0, exp_sum(spectral_->survival_weights, spectral_->rates, z));
  return std::max(0.0, jumps_.alpha.dot(expm(z) * Eigen::VectorXd::Ones(jumps_.phases())));
}

double PhaseTypeLevyModel::jump_partial_mean(double a) const {
  a = std::max(a, 0.0);
  // int_a^inf z exp(Tz) dz = (-a T^{-1} + T^{-2}) exp(Ta)
  const auto lu = jumps_.T.partialPivLu();
  const Eigen::VectorXd e = expm(a) * exit_;
  const Eigen::VectorXd once = lu.solve(e);
  return jumps_.alpha.dot(-a * once + lu.solve(once));
}

double PhaseTypeLevyModel::jump_partial_laplace(double lambda, double a) const {
  a = std::max(a, 0.0);
  const auto m = jumps_.phases();
  // int_a^inf exp((T - lambda) z) dz = (lambda I - T)^{-1} exp((T - lambda) a)
  const Eigen::MatrixXd shifted = lambda * Eigen::MatrixXd::Identity(m, m) - jumps_.T;
  const double decay = std::exp(-lambda * a);
  if (decay == 0.0) return 0.0;
  return decay * jumps_.alpha.dot(shifted.partialPivLu().solve(expm(a) * exit_));
}

double PhaseTypeLevyModel::jump_tail_cutoff(double mass) const {
  if (!(mass > 0.0 && mass < 1.0)) throw DomainError("tail mass must lie in (0, 1)");
  double lo = 0.0;
  double hi = std::max(mean_jump_, 1e-3);
  while (jump_survival(hi) >= mass) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("jump tail cutoff not found");
  }
  for (int i = 0; i < 100 && hi - lo > 1e-10 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (jump_survival(mid) >= mass ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace pdiv
