#pragma once

#include <cmath>

#include "pdiv/scale.hpp"

namespace pdiv {

// Exact right tail of a curve: for x >= start,
//   g(x) = constant + slope * x + amplitude * exp(-rate * (x - start)).
struct AffineExpTail {
  double start = 0.0;
  double constant = 0.0;
  double slope = 0.0;
  double amplitude = 0.0;
  double rate = 0.0;

  double value(double x) const {
    return constant + slope * x + amplitude * std::exp(-rate * (x - start));
  }
};

// A value curve that can be fed to the generator: values, one-sided
// derivatives up to order 3, and its exact affine-plus-exponential tail.
class SmoothCurve {
 public:
  virtual ~SmoothCurve() = default;
  virtual double value(double x) const = 0;
  // order in {1, 2, 3}; side selects the one-sided limit at kinks.
  virtual double derivative(double x, int order, Side side = Side::right) const = 0;
  virtual AffineExpTail tail() const = 0;
};

}  // namespace pdiv
