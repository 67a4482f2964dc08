#include <exception>
#include <iostream>
#include <optional>
#include <string>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "scoredyn/errors.hpp"
#include "scoredyn_cli/config.hpp"
#include "scoredyn_cli/runner.hpp"

namespace {

int exit_code_for(const scoredyn::Error& e) {
  switch (e.kind()) {
    case scoredyn::ErrorKind::invalid_args:
    case scoredyn::ErrorKind::parse: return scoredyn::cli::exit_invalid_config;
    default: return scoredyn::cli::exit_numeric_failure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scoredyn: experiments on the optimal score field and its sampling dynamics"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  unsigned threads = 0;

  auto* run_cmd = app.add_subcommand("run", "Run the configured experiment");
  auto* describe_cmd = app.add_subcommand("describe", "Print resolved parameters");
  auto* validate_cmd = app.add_subcommand("validate", "Check a config file");
  for (auto* cmd : {run_cmd, describe_cmd, validate_cmd})
    cmd->add_option("config", config_path, "JSON config file")->required();
  run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--out-dir", out_dir, "Override the output directory");
  run_cmd->add_option("--threads", threads, "Worker threads for sweeps (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  using namespace scoredyn::cli;
  std::string stage = "loading " + config_path;
  try {
    const ExperimentConfig config = load_config(config_path);
    if (*validate_cmd) {
      std::cout << "OK " << config_path << '\n';
      return exit_ok;
    }
    if (*describe_cmd) {
      std::cout << describe(config);
      return exit_ok;
    }
    stage = "running " + to_string(config.experiment);
    RunOptions options;
    options.out_dir = out_dir;
    options.seed = seed;
    options.threads = threads;
    const RunResult result = run(config, options, std::cout);
    for (const auto& a : result.artifacts) std::cout << "wrote " << a << '\n';
    return result.exit_code();
  } catch (const scoredyn::Error& e) {
    std::cerr << "error while " << stage << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error while " << stage << ": " << e.what() << '\n';
    return exit_numeric_failure;
  }
}
