#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pdiv/errors.hpp"
#include "pdiv/levy_model.hpp"

using pdiv::PhaseTypeLevyModel;

namespace {

const oracle::Model kExpModel{0.5, 0.2, 2.0, oracle::exponential(1.0)};
const oracle::Model kCase1{0.5, 0.2, 2.0, oracle::folded_normal_fit()};

}  // namespace

TEST_CASE("Laplace exponent by hand") {
  const auto m = oracle::build(kExpModel);
  // 0.5 + 0.02 + 2 (1/2 - 1)
  CHECK(m.laplace_exponent(1.0) == doctest::Approx(-0.48).epsilon(1e-14));
  CHECK(m.laplace_exponent(0.0) == 0.0);
  for (double th : {0.1, 0.7, 3.0, 25.0}) {
    CHECK(m.laplace_exponent(th) == doctest::Approx(kExpModel.psi(th)).epsilon(1e-13));
    const double h = 1e-5;
    const double fd = (kExpModel.psi(th + h) - kExpModel.psi(th - h)) / (2 * h);
    CHECK(m.laplace_exponent_derivative(th) == doctest::Approx(fd).epsilon(1e-8));
  }
  const pdiv::Complex z(0.8, 1.3);
  const pdiv::Complex want = 0.5 * z + 0.02 * z * z + 2.0 * (1.0 / (1.0 + z) - 1.0);
  CHECK(std::abs(m.laplace_exponent(z) - want) < 1e-13);
}

TEST_CASE("folded-normal fit moments") {
  const auto law = pdiv::folded_normal_phase_fit();
  const PhaseTypeLevyModel m(0.5, 0.2, 2.0, law);
  const double mu = std::sqrt(2.0 / std::numbers::pi);
  CHECK(m.mean_jump() == doctest::Approx(mu).epsilon(1e-14));
  CHECK(m.second_moment_jump() == doctest::Approx(1.0).epsilon(1e-13));
  const double mass = oracle::integrate_to_infinity([&](double z) { return m.jump_density(z); });
  const double mean =
      oracle::integrate_to_infinity([&](double z) { return z * m.jump_density(z); });
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(mu).epsilon(1e-12));
  // psi'(0+) = c - kappa E Z
  CHECK(m.psi_prime_at_zero() == doctest::Approx(-1.0957691216057308).epsilon(1e-13));
  const PhaseTypeLevyModel m2(2.0, 0.2, 2.0, law);
  CHECK(m2.psi_prime_at_zero() == doctest::Approx(0.4042308783942692).epsilon(1e-13));
}

TEST_CASE("jump density, survival and partial moments") {
  const auto m = oracle::build(kCase1);
  for (double z : {0.0, 0.3, 1.0, 4.0, 9.0}) {
    CHECK(m.jump_density(z) == doctest::Approx(kCase1.jumps.density(z)).epsilon(1e-12));
    const double surv = oracle::integrate_to_infinity(
        [&](double s) { return kCase1.jumps.density(z + s); });
    CHECK(m.jump_survival(z) == doctest::Approx(surv).epsilon(1e-11));
    const double pm = oracle::integrate_to_infinity(
        [&](double s) { return (z + s) * kCase1.jumps.density(z + s); });
    CHECK(m.jump_partial_mean(z) == doctest::Approx(pm).epsilon(1e-11));
    for (double lambda : {0.0, 0.5, 3.0}) {
      const double pl = oracle::integrate_to_infinity(
          [&](double s) { return std::exp(-lambda * (z + s)) * kCase1.jumps.density(z + s); });
      CHECK(m.jump_partial_laplace(lambda, z) == doctest::Approx(pl).epsilon(1e-11));
    }
  }
  const double cut = m.jump_tail_cutoff(1e-12);
  CHECK(m.jump_survival(cut) <= 1e-12);
  CHECK(m.jump_survival(0.99 * cut) > 1e-12);
}

TEST_CASE("Phi against the quadratic formula (no diffusion, exponential jumps)") {
  // c th^2 + (c mu - kappa - q) th - q mu = 0
  for (auto [c, kappa, mu] : {std::tuple{0.5, 2.0, 1.0}, std::tuple{2.0, 2.0, 1.0},
                              std::tuple{1.0, 0.5, 3.0}}) {
    const PhaseTypeLevyModel m(c, 0.0, kappa, pdiv::exponential_law(mu));
    for (double q : {0.01, 0.05, 0.15, 2.0}) {
      const double bq = c * mu - kappa - q;
      const double want = (-bq + std::sqrt(bq * bq + 4.0 * c * q * mu)) / (2.0 * c);
      CHECK(m.phi(q) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("Phi against bisection on an independent psi") {
  for (const auto& om : {kExpModel, kCase1, oracle::Model{2.0, 0.2, 2.0, oracle::folded_normal_fit()}}) {
    const auto m = oracle::build(om);
    for (double q : {0.05, 0.15, 1.0, 5.1}) {
      CHECK(m.phi(q) == doctest::Approx(om.phi(q)).epsilon(1e-11));
    }
  }
}

TEST_CASE("Phi is increasing in q") {
  const auto m = oracle::build(kCase1);
  double prev = 0.0;
  for (double q = 0.01; q < 10.0; q *= 1.7) {
    const double p = m.phi(q);
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("invalid inputs") {
  pdiv::PhaseTypeLaw bad;
  bad.alpha = Eigen::Vector2d(0.7, 0.2);
  bad.T = Eigen::Matrix2d{{-1.0, 0.5}, {0.0, -2.0}};
  CHECK_THROWS_AS(pdiv::validate(bad), pdiv::DomainError);
  bad.alpha = Eigen::Vector2d(0.5, 0.5);
  bad.T = Eigen::Matrix2d{{-1.0, 1.5}, {0.0, -2.0}};
  CHECK_THROWS_AS(pdiv::validate(bad), pdiv::DomainError);
  bad.T = Eigen::Matrix2d{{-1.0, -0.5}, {0.0, -2.0}};
  CHECK_THROWS_AS(pdiv::validate(bad), pdiv::DomainError);
  CHECK_THROWS_AS(pdiv::exponential_law(0.0), pdiv::DomainError);
  CHECK_THROWS_AS(PhaseTypeLevyModel(0.5, -0.1, 2.0, pdiv::exponential_law(1.0)),
                  pdiv::DomainError);
  CHECK_THROWS_AS(PhaseTypeLevyModel(0.0, 0.0, 2.0, pdiv::exponential_law(1.0)),
                  pdiv::DomainError);
  const auto m = oracle::build(kExpModel);
  CHECK_THROWS_AS(m.phi(0.0), pdiv::DomainError);
  CHECK_THROWS_AS(m.laplace_exponent(-1.0), pdiv::DomainError);
}
