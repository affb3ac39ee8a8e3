#pragma once

#include <cstdint>
#include <random>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <string>
#include <vector>

#include "pdiv/levy_model.hpp"
#include "pdiv/valuation.hpp"

namespace pdiv {

struct McConfig {
  std::size_t paths = 100000;
  std::uint64_t seed = 20170601;
  double horizon_eps = 1e-6;  // horizon T_max = ln(1/eps)/q
  double dt_max = 0.01;       // injection-accounting sub-interval (bailout)
  bool antithetic = false;    // pairs sharing a stream with negated Gaussians
  unsigned threads = 0;       // 0: hardware concurrency

  void validate() const;
};

inline constexpr const char* kRngAlgorithm =
    "mt19937_64 seeded with splitmix64(seed + splitmix64(path)); ziggurat normal and exponential";

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t paths_used = 0;
  double dividends = 0.0;
  double dividends_std_error = 0.0;
  double injections = 0.0;  // bailout: E int exp(-q t) dR
  double injections_std_error = 0.0;
  double ruin_transform = 0.0;  // dividends: E exp(-q tau)
  double ruin_fraction = 0.0;   // dividends: P(tau <= T_max)
  double horizon = 0.0;
  double horizon_bias_bound = 0.0;
  double discount_bias_bound = 0.0;  // bailout: end-of-sub-interval discounting
  double decision_rate = 0.0;        // observed decisions per unit time
  double decision_rate_std_error = 0.0;
  std::string rng = kRngAlgorithm;

  // Total tolerance for comparing with an exact value: k standard errors plus
  // the reported deterministic bias bounds.
  double tolerance(double k) const {
    return k * std_error + horizon_bias_bound + discount_bias_bound;
  }
};

// Per-path random stream. With `flip` set, every Gaussian draw is negated.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t stream, bool flip = false);
  double uniform();  // (0, 1]
  double normal();
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::exponential_distribution<double> exponential_;
  bool flip_;
};

// P(min of a Brownian bridge from a to b over dt < 0) = exp(-2ab/(sigma^2 dt)), a, b > 0.
double bridge_crossing_probability(double a, double b, double sigma, double dt);
bool sample_bridge_crossing(double a, double b, double sigma, double dt, PathRng& rng);
// Minimum of a Brownian bridge from a to b over dt (exact inversion).
double sample_bridge_minimum(double a, double b, double sigma, double dt, PathRng& rng);
// First time a Brownian bridge from a > 0 to b hits 0, given that it does.
// With w ~ IG(a/|b|, a^2/(sigma^2 dt)) the hitting time is dt w / (1 + w).
double sample_bridge_hitting_time(double a, double b, double sigma, double dt, PathRng& rng);
double sample_inverse_gaussian(double mean, double shape, PathRng& rng);

struct MinAndEndpoint {
  double endpoint = 0.0;
  double minimum = 0.0;
};
// Brownian motion with drift started at `start`: endpoint after dt and the
// running minimum over [0, dt], sampled from their exact joint law.
MinAndEndpoint sample_min_and_endpoint(double start, double drift, double sigma, double dt,
                                       PathRng& rng);

// Phase-type sampler by walking the underlying Markov chain.
class PhaseTypeSampler {
 public:
  explicit PhaseTypeSampler(const PhaseTypeLaw& law);
  double sample(PathRng& rng) const;

 private:
  std::vector<double> initial_cdf_;
  std::vector<double> exit_rate_;
  std::vector<std::vector<double>> transition_cdf_;  // last entry: absorption
};

// Periodic barrier strategy at b, ruin at the first passage below 0.
McEstimate simulate_dividends(const PhaseTypeLevyModel& model, const ProblemSpec& spec, double b,
                              double x, const McConfig& cfg);
// Periodic barrier at b with classical reflection (capital injection) at 0.
McEstimate simulate_bailout(const PhaseTypeLevyModel& model, const ProblemSpec& spec, double b,
                            double x, const McConfig& cfg);

}  // namespace pdiv
