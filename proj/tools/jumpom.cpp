// Command-line entry point: one subcommand per experiment type, each driven by
// a JSON config file.
//
//   jumpom <subcommand> --config PATH [--seed U64] [--out DIR] [--threads N]
//
// `jumpom run --config manifest.json` repeats a previous run.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "jumpom/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Onsager-Machlup toolkit for jump-diffusions"};
  app.require_subcommand(1);

  jumpom::RunRequest request;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;

  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "experiment config (JSON) or a manifest.json")->required();
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->callback([&request, name] { request.subcommand = name; });
  };
  add("validate", "check a model against its standing assumptions");
  add("simulate", "sample jump-diffusion paths and marginals");
  add("solve-fpe", "solve the forward equation on a grid");
  add("flow-compare", "compare jump-diffusion and probability-flow marginals");
  add("om-eval", "evaluate the OM action along a smooth path");
  add("tube-ratio", "Monte Carlo tube probabilities against the action difference");
  add("map", "minimum-action path between two points");
  add("dom-eval", "discrete action of the infinite-activity model on a knot path");
  add("run", "run whatever experiment the config (or manifest) names");

  CLI11_PARSE(app, argc, argv);

  request.config = config;
  request.seed = seed;
  if (out) request.out = *out;
  request.threads = threads;
  return jumpom::run_experiment(request, std::cout, std::cerr).exit_code;
}
