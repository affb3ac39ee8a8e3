// Command-line front end: pdiv <solve|curve|fcurve|hjb|simulate|sweep> [options]

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pdiv/config.hpp"
#include "pdiv/errors.hpp"
#include "pdiv/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Periodic dividend barriers for spectrally positive phase-type Levy processes"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = "out";
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::string sweep_over;
  bool quiet = false;
  bool plot_script = false;

  for (const auto& name : pdiv::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file (defaults when omitted)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv"}))
        ->capture_default_str();
    sub->add_option("--seed", seed, "override the Monte Carlo seed");
    sub->add_flag("--quiet", quiet, "suppress the printed summary");
    sub->add_flag("--plot-script", plot_script, "also write a gnuplot script per table");
    if (name == "sweep") {
      sub->add_option("--over", sweep_over, "sweep over r or rho")
          ->check(CLI::IsMember({"r", "rho"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pdiv::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    auto cfg = config_path.empty() ? pdiv::config_from_json(nlohmann::json::object())
                                   : pdiv::load_config(config_path);
    if (seed) cfg.mc.seed = *seed;
    if (!sweep_over.empty()) cfg.sweep.over = sweep_over;

    const auto result = pdiv::run_command(command, cfg);
    pdiv::write_outputs(out_dir, result, cfg, plot_script);
    if (!quiet) {
      for (const auto& line : result.summary) std::cout << line << "\n";
      std::cout << "wrote " << out_dir << "/" << command << ".csv\n";
    }
    return result.exit_code;
  } catch (const pdiv::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return pdiv::kExitConfig;
  } catch (const pdiv::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return pdiv::kExitConfig;
  } catch (const pdiv::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return pdiv::kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pdiv::kExitNumeric;
  }
}
