#include "pdiv/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <thread>

#include "pdiv/errors.hpp"

namespace pdiv {

void McConfig::validate() const {
  if (paths < 1) throw DomainError("Monte Carlo needs at least one path");
  if (!(horizon_eps > 0.0 && horizon_eps < 1.0)) throw DomainError("horizon_eps must lie in (0, 1)");
  if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw DomainError("dt_max must be positive");
}

namespace {

// SplitMix64 finalizer: a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t stream, bool flip)
    : engine_(mix64(seed + mix64(stream))), flip_(flip) {}

double PathRng::uniform() {
  // 53 random bits mapped to (0, 1].
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double PathRng::normal() {
  const double z = normal_(engine_);
  return flip_ ? -z : z;
}

double PathRng::exponential(double rate) { return exponential_(engine_) / rate; }

double bridge_crossing_probability(double a, double b, double sigma, double dt) {
  if (a <= 0.0 || b <= 0.0) return 1.0;
  return std::exp(-2.0 * a * b / (sigma * sigma * dt));
}

bool sample_bridge_crossing(double a, double b, double sigma, double dt, PathRng& rng) {
  return rng.uniform() <= bridge_crossing_probability(a, b, sigma, dt);
}

double sample_bridge_minimum(double a, double b, double sigma, double dt, PathRng& rng) {
  const double d = a - b;
  return 0.5 * (a + b - std::sqrt(d * d + 2.0 * sigma * sigma * dt * rng.exponential(1.0)));
}

double sample_inverse_gaussian(double mean, double shape, PathRng& rng) {
  // Michael-Schucany-Haas; the two roots multiply to mean^2, so the smaller one
  // is taken as mean^2 / larger to avoid cancellation.
  const double nu = rng.normal();
  const double y = nu * nu;
  const double my = mean * y;
  const double larger = mean + mean * (my + std::sqrt(4.0 * shape * my + my * my)) / (2.0 * shape);
  const double smaller = mean * mean / larger;
  return rng.uniform() * (mean + smaller) <= mean ? smaller : larger;
}

double sample_bridge_hitting_time(double a, double b, double sigma, double dt, PathRng& rng) {
  if (a <= 0.0) return 0.0;
  const double shape = a * a / (sigma * sigma * dt);
  const double end = std::abs(b);
  double w;
  if (end == 0.0 || a / end > 1e12) {
    // Levy limit of IG as the mean diverges.
    const double nu = rng.normal();
    w = shape / (nu * nu);
  } else {
    w = sample_inverse_gaussian(a / end, shape, rng);
  }
  if (!std::isfinite(w)) return dt;
  return dt * w / (1.0 + w);
}

MinAndEndpoint sample_min_and_endpoint(double start, double drift, double sigma, double dt,
                                       PathRng& rng) {
  MinAndEndpoint out;
  out.endpoint = start + drift * dt + sigma * std::sqrt(dt) * rng.normal();
  out.minimum = sigma > 0.0 ? sample_bridge_minimum(start, out.endpoint, sigma, dt, rng)
                            : std::min(start, out.endpoint);
  return out;
}

PhaseTypeSampler::PhaseTypeSampler(const PhaseTypeLaw& law) {
  validate(law);
  const int m = law.phases();
  const Eigen::VectorXd exit = law.exit_vector();
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    acc += law.alpha(i);
    initial_cdf_.push_back(acc);
  }
  initial_cdf_.back() = 1.0;
  for (int i = 0; i < m; ++i) {
    const double rate = -law.T(i, i);
    exit_rate_.push_back(rate);
    std::vector<double> cdf;
    double c = 0.0;
    for (int j = 0; j < m; ++j) {
      c += (i == j ? 0.0 : law.T(i, j)) / rate;
      cdf.push_back(c);
    }
    cdf.push_back(1.0);
    transition_cdf_.push_back(std::move(cdf));
  }
}

double PhaseTypeSampler::sample(PathRng& rng) const {
  const int m = static_cast<int>(exit_rate_.size());
  // a distribution concentrated on one index needs no draw
  auto pick = [&](const std::vector<double>& cdf) {
    for (std::size_t k = 0; k < cdf.size(); ++k) {
      if (cdf[k] == 1.0 && (k == 0 || cdf[k - 1] == 0.0)) return static_cast<int>(k);
      if (cdf[k] > 0.0) break;
    }
    const double u = rng.uniform();
    return static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  };
  int state = std::min(pick(initial_cdf_), m - 1);
  double total = 0.0;
  while (state < m) {
    total += rng.exponential(exit_rate_[state]);
    state = pick(transition_cdf_[state]);
  }
  return total;
}

namespace {

// Draws the crossing indicator, skipping the uniform when the probability
// underflows to 0 (a draw in (0, 1] could never succeed then).
bool crosses_zero(double a, double b, double sigma, double dt, PathRng& rng) {
  if (a <= 0.0 || b <= 0.0) return true;
  const double exponent = -2.0 * a * b / (sigma * sigma * dt);
  if (exponent < -745.0) return false;
  return rng.uniform() <= std::exp(exponent);
}

struct PathResult {
  double dividends = 0.0;
  double injections = 0.0;
  double ruin_discount = 0.0;
  bool ruined = false;
  double observed_time = 0.0;
  std::size_t decisions = 0;
  double terminal_surplus = 0.0;
};

struct Sampling {
  const PhaseTypeLevyModel& model;
  const ProblemSpec& spec;
  PhaseTypeSampler jumps;
  double barrier;
  double start;
  double horizon;
  double dt_max;
};

PathResult dividends_path(const Sampling& s, PathRng& rng) {
  const double c = s.model.drift();
  const double sigma = s.model.sigma();
  const double q = s.spec.q;
  const double event_rate = s.model.kappa() + s.spec.r;
  const double decision_share = s.spec.r / event_rate;
  PathResult out;
  double u = s.start;
  double t = 0.0;
  while (true) {
    const double h = rng.exponential(event_rate);
    if (t + h > s.horizon) {
      out.observed_time = s.horizon;
      out.terminal_surplus = u;
      break;
    }
    // Free motion over (t, t + h]: exact first-passage detection below 0.
    double hit = -1.0;
    if (sigma > 0.0) {
      if (u <= 0.0) {
        hit = 0.0;
      } else {
        const double end = u - c * h + sigma * std::sqrt(h) * rng.normal();
        if (crosses_zero(u, end, sigma, h, rng)) {
          hit = sample_bridge_hitting_time(u, end, sigma, h, rng);
        } else {
          u = end;
        }
      }
    } else {
      const double end = u - c * h;
      if (end < 0.0 || u <= 0.0) {
        hit = std::max(u, 0.0) / c;
      } else {
        u = end;
      }
    }
    if (hit >= 0.0) {
      out.ruined = true;
      out.ruin_discount = std::exp(-q * (t + hit));
      out.observed_time = t + hit;
      break;
    }
    t += h;
    if (rng.uniform() <= decision_share) {
      ++out.decisions;
      if (u > s.barrier) {
        const double paid = u - s.barrier;
        assert(paid >= 0.0 && paid <= u);
        out.dividends += paid * std::exp(-q * t);
        u = s.barrier;
      }
    } else {
      u += s.jumps.sample(rng);
    }
  }
  return out;
}

// Reflected motion over (t, t + h]; returns the discounted injections. The
// free endpoint and the first hitting time of 0 are exact; after that time the
// bridge is refined into pieces of length <= dt_max and each piece's
// injection is discounted at the piece end.
double reflected_step(const Sampling& s, double& y, double t, double h, PathRng& rng) {
  const double c = s.model.drift();
  const double sigma = s.model.sigma();
  const double q = s.spec.q;
  if (sigma == 0.0) {
    const double end = y - c * h;
    if (end >= 0.0) {
      y = end;
      return 0.0;
    }
    const double reach = y / c;
    y = 0.0;
    return c * (std::exp(-q * (t + reach)) - std::exp(-q * (t + h))) / q;
  }
  const double end = y - c * h + sigma * std::sqrt(h) * rng.normal();
  if (!crosses_zero(y, end, sigma, h, rng)) {
    y = end;
    return 0.0;
  }
  const double hit = sample_bridge_hitting_time(y, end, sigma, h, rng);
  const double rest = h - hit;
  const int pieces = std::max(1, static_cast<int>(std::ceil(rest / s.dt_max)));
  const double dt = rest / pieces;
  double discounted = 0.0;
  double running_min = 0.0;
  double prev = 0.0;
  for (int j = 0; j < pieces; ++j) {
    double next = end;
    if (j + 1 < pieces) {
      const double remaining = rest - j * dt;
      const double mean = prev + (end - prev) * dt / remaining;
      const double var = sigma * sigma * dt * (remaining - dt) / remaining;
      next = mean + std::sqrt(var) * rng.normal();
    }
    const double piece_min = std::min(sample_bridge_minimum(prev, next, sigma, dt, rng), prev);
    if (piece_min < running_min) {
      discounted += (running_min - piece_min) * std::exp(-q * (t + hit + (j + 1) * dt));
      running_min = piece_min;
    }
    prev = next;
  }
  y = end - running_min;
  return discounted;
}

PathResult bailout_path(const Sampling& s, PathRng& rng) {
  const double q = s.spec.q;
  const double event_rate = s.model.kappa() + s.spec.r;
  const double decision_share = s.spec.r / event_rate;
  PathResult out;
  double y = s.start;
  double t = 0.0;
  while (true) {
    double h = rng.exponential(event_rate);
    const bool last = t + h >= s.horizon;
    if (last) h = s.horizon - t;
    out.injections += reflected_step(s, y, t, h, rng);
    t += h;
    if (last) break;
    if (rng.uniform() <= decision_share) {
      ++out.decisions;
      if (y > s.barrier) {
        out.dividends += (y - s.barrier) * std::exp(-q * t);
        y = s.barrier;
      }
    } else {
      y += s.jumps.sample(rng);
    }
  }
  out.observed_time = s.horizon;
  out.terminal_surplus = y;
  return out;
}

// Welford running mean and variance.
struct Accumulator {
  double count = 0.0;
  double mean_ = 0.0;
  double m2 = 0.0;
  void add(double v) {
    count += 1.0;
    const double delta = v - mean_;
    mean_ += delta / count;
    m2 += delta * (v - mean_);
  }
  double mean() const { return mean_; }
  double std_error() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / (count - 1.0) / count);
  }
};

template <class PathFn>
McEstimate run(const Sampling& s, const McConfig& cfg, PathFn path) {
  const bool bailout = s.spec.kind == ProblemKind::bailout;
  const std::size_t per_unit = cfg.antithetic ? 2 : 1;
  const std::size_t units = (cfg.paths + per_unit - 1) / per_unit;
  std::vector<PathResult> results(units * per_unit);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t u = begin; u < end; ++u) {
      for (std::size_t k = 0; k < per_unit; ++k) {
        PathRng rng(cfg.seed, u, k == 1);
        results[u * per_unit + k] = path(s, rng);
      }
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, units));
  if (threads <= 1) {
    work(0, units);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (units + threads - 1) / threads;
    for (unsigned i = 0; i < threads; ++i) {
      const std::size_t begin = i * chunk;
      const std::size_t end = std::min(units, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  Accumulator total, div, inj, ruin;
  std::size_t ruined = 0;
  std::size_t decisions = 0;
  double observed = 0.0;
  double terminal = 0.0;
  for (std::size_t u = 0; u < units; ++u) {
    double npv = 0.0, d = 0.0, i = 0.0, rd = 0.0;
    for (std::size_t k = 0; k < per_unit; ++k) {
      const PathResult& p = results[u * per_unit + k];
      d += p.dividends / per_unit;
      i += p.injections / per_unit;
      rd += p.ruin_discount / per_unit;
      ruined += p.ruined;
      decisions += p.decisions;
      observed += p.observed_time;
      if (!p.ruined) terminal += p.terminal_surplus;
    }
    npv = bailout ? d - s.spec.beta * i : d + s.spec.rho * rd;
    total.add(npv);
    div.add(d);
    inj.add(i);
    ruin.add(rd);
  }
  const double paths = static_cast<double>(units * per_unit);
  McEstimate est;
  est.paths_used = units * per_unit;
  est.mean = total.mean();
  est.std_error = total.std_error();
  est.dividends = div.mean();
  est.dividends_std_error = div.std_error();
  est.injections = inj.mean();
  est.injections_std_error = inj.std_error();
  est.ruin_transform = ruin.mean();
  est.ruin_fraction = static_cast<double>(ruined) / paths;
  est.horizon = s.horizon;
  est.decision_rate = observed > 0.0 ? static_cast<double>(decisions) / observed : 0.0;
  est.decision_rate_std_error =
      observed > 0.0 ? std::sqrt(static_cast<double>(decisions)) / observed : 0.0;

  const double q = s.spec.q;
  const double jump_value = s.model.kappa() * s.model.mean_jump() / q;
  const double mean_terminal = terminal / paths;
  if (bailout) {
    const double injection_bound =
        std::max(s.model.drift(), 0.0) / q + s.model.sigma() / std::sqrt(2.0 * q);
    est.horizon_bias_bound =
        cfg.horizon_eps * (mean_terminal + jump_value + s.spec.beta * injection_bound);
    if (s.model.sigma() > 0.0) {
      est.discount_bias_bound = s.spec.beta * (1.0 - std::exp(-q * cfg.dt_max)) *
                                (est.injections + 3.0 * est.injections_std_error);
    }
  } else {
    est.horizon_bias_bound =
        cfg.horizon_eps * (std::abs(s.spec.rho) + mean_terminal + jump_value);
  }
  return est;
}

}  // namespace

McEstimate simulate_dividends(const PhaseTypeLevyModel& model, const ProblemSpec& spec, double b,
                              double x, const McConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (spec.kind != ProblemKind::dividends) throw DomainError("simulate_dividends needs dividends");
  if (!(b >= 0.0) || !(x >= 0.0)) throw DomainError("barrier and start must be nonnegative");
  const Sampling s{model, spec, PhaseTypeSampler(model.jumps()), b, x,
                   std::log(1.0 / cfg.horizon_eps) / spec.q, cfg.dt_max};
  return run(s, cfg, dividends_path);
}

McEstimate simulate_bailout(const PhaseTypeLevyModel& model, const ProblemSpec& spec, double b,
                            double x, const McConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (spec.kind != ProblemKind::bailout) throw DomainError("simulate_bailout needs bailout");
  if (!(b >= 0.0) || !(x >= 0.0)) throw DomainError("barrier and start must be nonnegative");
  const Sampling s{model, spec, PhaseTypeSampler(model.jumps()), b, x,
                   std::log(1.0 / cfg.horizon_eps) / spec.q, cfg.dt_max};
  return run(s, cfg, bailout_path);
}

}  // namespace pdiv
