#include <CLI11.hpp>
#include <iostream>

#include "specflow/runner.hpp"

namespace {

constexpr const char* kCommands[] = {"build-pair",  "build-ceiling", "birkhoff",
                                     "tower-report", "stretch-scan",  "staircase",
                                     "correlation", "full-report",   "plot-script"};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const specflow::InfeasibleScale*>(&e)) return 3;
  if (dynamic_cast<const specflow::PrecisionError*>(&e)) return 4;
  if (dynamic_cast<const specflow::NonpositiveCeiling*>(&e)) return 5;
  return 2;  // config errors, invalid arguments, everything else
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"special flows over torus translations: construction and diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  long long seed = -1;
  int threads = 0;

  for (const char* name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file (key = value)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override analysis.seed");
    sub->add_option("--threads", threads, "worker threads (advisory)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    specflow::cli::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = specflow::cli::ExperimentConfig::parse_file(config_path);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (threads > 0) cfg.threads = threads;
    std::cout << specflow::cli::run_command(command, cfg, out_dir);
    return 0;
  } catch (const specflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
