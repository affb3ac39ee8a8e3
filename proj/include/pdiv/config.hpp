#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdiv/levy_model.hpp"
#include "pdiv/simulator.hpp"
#include "pdiv/valuation.hpp"

namespace pdiv {

struct ModelConfig {
  double c = 0.5;
  double sigma = 0.2;
  double kappa = 2.0;
  std::optional<PhaseTypeLaw> law;  // empty: builtin folded-normal fit
};

struct GridConfig {
  double x_max = 0.0;  // 0: barrier + 5 / Phi(q + r)
  int n_points = 200;
};

struct SweepConfig {
  std::string over = "r";  // "r" or "rho"
  std::vector<double> r_list{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> rho_list{-20, -15, -10, -5, 0, 5, 10, 15, 20};
  std::vector<double> b_list;  // empty: {0, b/2, 3b/2, 2b} around the optimum
};

// Defaults reproduce the baseline numerical setting: sigma = 0.2, kappa = 2,
// c = 0.5, q = 0.05, r = 0.1, rho = 0 (beta = 2 for bailout).
struct ExperimentConfig {
  ModelConfig model;
  ProblemSpec problem;
  GridConfig grid;
  McConfig mc;
  std::vector<double> mc_x_list{0.5, 1.0, 2.0, 4.0};
  SweepConfig sweep;
  double reference_x = 1.0;

  PhaseTypeLevyModel build_model() const;
  nlohmann::json to_json() const;
  // FNV-1a over the canonical JSON dump.
  std::uint64_t hash() const;
};

// Throws ConfigError with a line/column (syntax) or JSON-pointer (schema)
// diagnostic. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::json& doc);

}  // namespace pdiv
