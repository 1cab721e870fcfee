#include <CLI11.hpp>
#include <iostream>

#include "sgldv/cli/commands.hpp"
#include "sgldv/parallel.hpp"

int main(int argc, char** argv) {
  using namespace sgldv::cli;
  CLI::App app{"Stochastic gradient Langevin samplers and transition-kernel verification"};
  app.require_subcommand(1);
  std::string config_path;
  CommandOptions opt;
  opt.jobs = sgldv::default_jobs();
  std::optional<std::uint64_t> seed_override;
  app.add_option("--config", config_path, "Configuration file (INI)")->required();
  app.add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", opt.out_dir, "Output directory");
  app.add_option("--seed-override", seed_override, "Replace the sampler seed");

  using Command = int (*)(const ExperimentConfig&, const CommandOptions&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"run", "Run a chain; write trajectory, histogram and summary", cmd_run},
      {"schedule", "Compute step size and iteration count", cmd_schedule},
      {"kernel", "Build the discretized kernel and run its checks", cmd_kernel},
      {"check", "Probe the declared target constants", cmd_check},
      {"sweep", "Step-size or conductance scaling sweep", cmd_sweep},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed_override) {
      cfg.sampler.values["seed"] = std::to_string(*seed_override);
      cfg.sampler.lines["seed"] = 0;
    }
    for (const auto& [name, help, fn] : commands)
      if (app.got_subcommand(name)) return fn(cfg, opt, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 1;
}
