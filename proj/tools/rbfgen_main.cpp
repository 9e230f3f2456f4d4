#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rbfgen/commands.hpp"
#include "rbfgen/config.hpp"
#include "rbfgen/errors.hpp"

namespace {

// One subcommand per run mode; every mode takes the same three options, so
// wire them through a shared struct.
struct CliArgs {
  std::string config_path;
  int jobs = -1;  // -1 = not given on the command line
  bool deterministic = false;
};

void add_run_options(CLI::App* sub, CliArgs& args) {
  sub->add_option("--config", args.config_path, "Path to the run-config JSON file")
      ->required();
  sub->add_option("--jobs", args.jobs, "Worker threads (default: available cores)")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--deterministic", args.deterministic,
                "Bit-reproducible outputs: single-threaded, wall times zeroed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-guided RBF surrogate ensembles"};
  app.require_subcommand(1);

  CliArgs args;
  const char* commands[] = {"demo1d", "beam", "crossval", "fit", "predict"};
  const char* descriptions[] = {
      "Four-point 1D interpolation showcase with prior-shaped ensembles",
      "Cantilever sizing study: surrogate-guided optimization vs the true model",
      "Leave-two-out cross-validation over a multi-response dataset",
      "Train a surrogate ensemble on a dataset with declared priors",
      "Evaluate a saved model with confidence intervals at given points"};
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    add_run_options(app.add_subcommand(commands[i], descriptions[i]), args);
  }

  CLI11_PARSE(app, argc, argv);

  rbfgen::RunConfig cfg;
  try {
    cfg = rbfgen::parse_config(args.config_path);
  } catch (const rbfgen::IoError& e) {
    std::cerr << "rbfgen: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "rbfgen: " << e.what() << "\n";
    return 2;
  }

  // The subcommand must agree with the config file's declared command.
  const std::string sub = app.get_subcommands().front()->get_name();
  if (sub != rbfgen::command_name(cfg.command)) {
    std::cerr << "rbfgen: config declares command '"
              << rbfgen::command_name(cfg.command) << "' but the '" << sub
              << "' subcommand was invoked\n";
    return 2;
  }

  // Command-line flags override the file.
  if (args.jobs > 0) cfg.jobs = args.jobs;
  if (args.deterministic) cfg.deterministic = true;

  return rbfgen::run_command(cfg);
}
