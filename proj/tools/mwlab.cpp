#include <iostream>

#include "CLI11.hpp"
#include "mwlab/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Martingale decomposition laboratory for finite Markov chains"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<mwlab::Index> workers;
  std::string out_dir;

  const char* names[][2] = {
      {"check", "validate the chain and print its stationary law"},
      {"decompose", "solve for h, H, D and the partial-sum growth"},
      {"simulate", "sample paths and write S, M, R traces"},
      {"verify", "run the statistical verification suite"},
      {"oracle", "enumerate short paths exactly"},
      {"report", "collect summaries from an output directory"},
  };
  for (const auto& [name, help] : names) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mwlab::kExitInputError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  mwlab::RunConfig cfg;
  try {
    cfg = mwlab::load_config(config_path);
  } catch (const mwlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mwlab::kExitInputError;
  }
  if (seed) cfg.seed = seed;
  if (workers) cfg.workers = *workers;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return mwlab::run_command(command, cfg, std::cout, std::cerr);
}
