#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "pdiv/errors.hpp"
#include "pdiv/valuation.hpp"
#include "pdiv/verification.hpp"

using pdiv::ProblemSpec;
using pdiv::Side;
using pdiv::Valuation;

namespace {

const oracle::Model kCase1{0.5, 0.2, 2.0, oracle::folded_normal_fit()};
const oracle::Model kCase2{2.0, 0.2, 2.0, oracle::folded_normal_fit()};
const oracle::Model kNoDiffusion{0.5, 0.0, 2.0, oracle::exponential(1.0)};

// Residual of the barrier-strategy equation
//   (L - q) g(x) + r (x - b + g(b) - g(x)) 1{x > b} = 0,
// with L applied by quadrature.
double strategy_residual(const Valuation& val, const pdiv::SmoothCurve& g, double b, double x) {
  const double q = val.spec().q, r = val.spec().r;
  double res = pdiv::apply_generator(val.model(), g, x) - q * g.value(x);
  if (x > b) res += r * (x - b + g.value(b) - g.value(x));
  return res;
}

}  // namespace

TEST_CASE("v_b solves the barrier-strategy equation for arbitrary barriers") {
  for (const auto& om : {kCase1, kCase2, kNoDiffusion}) {
    const auto m = oracle::build(om);
    for (double rho : {0.0, 3.0}) {
      const Valuation val(m, ProblemSpec::dividends(0.05, 0.1, rho));
      for (double b : {0.0, 0.4, 1.7, 3.0}) {
        const auto v = val.v_b(b);
        CHECK(v.value(0.0) == doctest::Approx(rho).epsilon(1e-10));
        for (double x : {0.05, 0.3, 1.0, 2.2, 4.0}) {
          if (std::abs(x - b) < 1e-9) continue;
          CHECK(std::abs(strategy_residual(val, v, b, x)) < 1e-7 * (1.0 + std::abs(v.value(x))));
        }
      }
    }
  }
}

TEST_CASE("u_b solves the barrier-strategy equation with reflection at 0") {
  for (const auto& om : {kCase1, kCase2, kNoDiffusion}) {
    const auto m = oracle::build(om);
    const Valuation val(m, ProblemSpec::bailout(0.05, 0.1, 2.0));
    for (double b : {0.0, 0.5, 2.0}) {
      const auto u = val.u_b(b);
      CHECK(u.derivative(0.0, 1, Side::right) == doctest::Approx(2.0).epsilon(1e-10));
      for (double x : {0.05, 0.3, 1.0, 3.0}) {
        if (std::abs(x - b) < 1e-9) continue;
        CHECK(std::abs(strategy_residual(val, u, b, x)) < 1e-7 * (1.0 + std::abs(u.value(x))));
      }
    }
  }
}

TEST_CASE("barrier curve derivatives against finite differences") {
  const auto m = oracle::build(kCase1);
  const Valuation val(m, ProblemSpec::dividends(0.05, 0.1, 0.0));
  const auto v = val.v_b(1.3);
  auto f = [&](double x) { return v.value(x); };
  for (double x : {0.4, 1.0, 2.0, 3.5}) {
    CHECK(v.derivative(x, 1) == doctest::Approx(oracle::diff(f, x, 1, 1e-5)).epsilon(1e-7));
    CHECK(v.derivative(x, 2) == doctest::Approx(oracle::diff(f, x, 2, 1e-4)).epsilon(1e-5));
    CHECK(v.derivative(x, 3) == doctest::Approx(oracle::diff(f, x, 3, 1e-3)).epsilon(1e-4));
  }
  for (bool right : {false, true}) {
    const Side side = right ? Side::right : Side::left;
    CHECK(v.derivative(1.3, 1, side) ==
          doctest::Approx(oracle::one_sided(f, 1.3, 1, 1e-4, right)).epsilon(1e-6));
    CHECK(v.derivative(1.3, 2, side) ==
          doctest::Approx(oracle::one_sided(f, 1.3, 2, 1e-3, right)).epsilon(1e-4));
  }
  // the affine-plus-exponential tail reproduces the curve above the barrier
  const auto tail = v.tail();
  for (double x : {1.3, 2.0, 6.0}) CHECK(tail.value(x) == doctest::Approx(v.value(x)).epsilon(1e-12));
}

TEST_CASE("take-the-money-and-run curve") {
  for (double rho : {0.0, 2.5}) {
    const auto m = oracle::build(kCase2);
    const Valuation val(m, ProblemSpec::dividends(0.05, 0.1, rho));
    const auto v0 = val.optimal_value(0.0);
    const auto vb = val.v_b(0.0);
    for (double x : {0.0, 0.2, 1.0, 5.0}) {
      CHECK(v0->value(x) == doctest::Approx(vb.value(x)).epsilon(1e-11));
      CHECK(v0->derivative(x + 0.1, 1) == doctest::Approx(vb.derivative(x + 0.1, 1)).epsilon(1e-9));
    }
  }
}

TEST_CASE("ruin transform at b = 0 in closed form") {
  // Ruin happens before the first decision (rate r), or at that decision
  // after paying out everything.
  for (const auto& om : {kCase1, kCase2}) {
    const auto m = oracle::build(om);
    const double q = 0.05, r = 0.1;
    const Valuation val(m, ProblemSpec::dividends(q, r, 0.0));
    const double phi = om.phi(q + r);
    for (double x : {0.1, 1.0, 3.0}) {
      const double want = r / (q + r) + q / (q + r) * std::exp(-phi * x);
      CHECK(val.components(0.0, x).ruin_transform == doctest::Approx(want).epsilon(1e-11));
    }
  }
}

TEST_CASE("ruin transform of an unreachable barrier is exp(-Phi(q) x)") {
  const auto m = oracle::build(kCase2);
  const double q = 0.05;
  const Valuation val(m, ProblemSpec::dividends(q, 0.1, 0.0));
  for (double x : {0.5, 2.0}) {
    const auto c = val.components(400.0, x);
    CHECK(c.ruin_transform == doctest::Approx(std::exp(-kCase2.phi(q) * x)).epsilon(1e-9));
    CHECK(c.dividends < 1e-9);
  }
}

TEST_CASE("components add up to the NPV") {
  const auto m = oracle::build(kCase1);
  const Valuation div(m, ProblemSpec::dividends(0.05, 0.1, 1.5));
  const Valuation bail(m, ProblemSpec::bailout(0.05, 0.1, 2.0));
  for (double b : {0.3, 1.6}) {
    for (double x : {0.0, 0.5, 2.0}) {
      const auto cd = div.components(b, x);
      CHECK(cd.dividends + 1.5 * cd.ruin_transform == doctest::Approx(div.v_b(b).value(x)).epsilon(1e-12));
      const auto cb = bail.components(b, x);
      CHECK(cb.dividends - 2.0 * cb.injections == doctest::Approx(bail.u_b(b).value(x)).epsilon(1e-12));
      CHECK(cb.injections > 0.0);
      CHECK(cd.ruin_transform > 0.0);
      CHECK(cd.ruin_transform <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("classical counterpart") {
  const auto m = oracle::build(kCase1);
  const Valuation val(m, ProblemSpec::dividends(0.05, 0.1, 0.0));
  const auto cls = val.classical_limit();
  CHECK(cls.barrier > 0.0);
  // continuous reflection: slope one at and above the barrier, value 0 at ruin
  CHECK(cls.curve->derivative(cls.barrier, 1, Side::left) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cls.curve->derivative(cls.barrier + 1.0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(cls.curve->value(0.0)) < 1e-10);
  for (double x : {0.3, 1.0, 2.0}) {
    const double res = pdiv::apply_generator(m, *cls.curve, x) - 0.05 * cls.curve->value(x);
    CHECK(std::abs(res) < 1e-7);
  }
  const Valuation case2(oracle::build(kCase2), ProblemSpec::dividends(0.05, 0.1, 0.0));
  CHECK_THROWS_AS(case2.classical_limit(), pdiv::DomainError);
}

TEST_CASE("classical bailout counterpart") {
  const auto m = oracle::build(kCase1);
  const Valuation val(m, ProblemSpec::bailout(0.05, 0.1, 2.0));
  const auto cls = val.classical_limit();
  CHECK(cls.curve->derivative(0.0, 1, Side::right) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(cls.curve->derivative(cls.barrier, 1, Side::left) == doctest::Approx(1.0).epsilon(1e-9));
  for (double x : {0.1, 0.5, 0.9 * cls.barrier}) {
    const double res = pdiv::apply_generator(m, *cls.curve, x) - 0.05 * cls.curve->value(x);
    CHECK(std::abs(res) < 1e-7);
  }
}

TEST_CASE("problem validation") {
  CHECK_THROWS_AS(ProblemSpec::dividends(0.0, 0.1, 0.0), pdiv::DomainError);
  CHECK_THROWS_AS(ProblemSpec::dividends(0.05, -1.0, 0.0), pdiv::DomainError);
  CHECK_THROWS_AS(ProblemSpec::bailout(0.05, 0.1, 1.0), pdiv::DomainError);
  const Valuation val(oracle::build(kCase1), ProblemSpec::dividends(0.05, 0.1, 0.0));
  CHECK_THROWS_AS(val.u_b(1.0), pdiv::DomainError);
  CHECK_THROWS_AS(val.v_b(-1.0), pdiv::DomainError);
  CHECK(pdiv::uniform_grid(0.0, 2.0, 5).back() == 2.0);
  CHECK(pdiv::uniform_grid(0.0, 2.0, 5).size() == 5);
}
