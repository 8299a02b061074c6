// geneft: command-line front end for the experiment harness.
//
//   geneft statics       --config statics.ini [--seed N] [--out DIR] [--workers N]
//   geneft repon         --config repon.ini ...
//   geneft train         --config train.ini ...
//   geneft phase-diagram --config pd.ini ...
//   geneft goldilocks    --config goldilocks.ini ...
//   geneft figure <id> --run DIR [--out DIR]
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or numerical error.

#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "geneft/common.hpp"
#include "geneft/harness.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
};

void add_run_options(CLI::App* cmd, RunOptions& opts) {
  cmd->add_option("--config", opts.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "override the config seed");
  cmd->add_option("--out", opts.out, "override the output directory");
  cmd->add_option("--workers", opts.workers, "worker threads (0: one per hardware thread)");
}

int run_experiment(const std::string& command, const RunOptions& opts,
                   const std::set<geneft::ExperimentKind>& allowed) {
  geneft::ExperimentConfig config = geneft::load_config(opts.config);
  if (!allowed.count(config.experiment)) {
    std::string names;
    for (auto kind : allowed) names += std::string(names.empty() ? "" : ", ") + geneft::to_string(kind);
    throw geneft::ConfigError("experiment '" + std::string(geneft::to_string(config.experiment)) +
                              "' cannot be run by '" + command + "' (expected " + names + ")");
  }
  if (opts.seed) config.seed = *opts.seed;
  if (opts.out) config.out = *opts.out;
  if (opts.workers) config.workers = *opts.workers;
  config.validate();

  const geneft::RunManifest manifest = geneft::run(config);
  std::cout << geneft::to_string(manifest.experiment) << ": wrote " << manifest.outputs.size() << " file(s) to "
            << config.out << '\n';
  for (const auto& e : manifest.outputs) std::cout << "  " << e.path << "  " << e.sha256.substr(0, 16) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using geneft::ExperimentKind;
  CLI::App app{"Statics, repon dynamics and autoencoder experiments on relation learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", geneft::kToolVersion);

  const std::map<std::string, std::set<ExperimentKind>> commands{
      {"statics", {ExperimentKind::StaticsCurve, ExperimentKind::StaticsAnalytic}},
      {"repon", {ExperimentKind::ReponPhaseSpace, ExperimentKind::ReponProbability}},
      {"train", {ExperimentKind::TrainOnce, ExperimentKind::FractionSweep}},
      {"phase-diagram", {ExperimentKind::LrPhaseDiagram, ExperimentKind::WdPhaseDiagram}},
      {"goldilocks", {ExperimentKind::Goldilocks}},
  };
  const std::map<std::string, std::string> help{
      {"statics", "best attainable accuracy vs training fraction"},
      {"repon", "repon phase space and collision probability"},
      {"train", "train one model or sweep the training fraction"},
      {"phase-diagram", "phase grid over learning rates or weight decay"},
      {"goldilocks", "accuracy vs decoder depth"},
  };

  std::map<std::string, RunOptions> options;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, kinds] : commands) {
    subs[name] = app.add_subcommand(name, help.at(name));
    add_run_options(subs[name], options[name]);
  }

  std::string figure_id;
  std::string run_dir;
  std::string figure_out = "figures";
  CLI::App* figure = app.add_subcommand("figure", "turn a run's outputs into plot-ready CSV and SVG");
  figure->add_option("id", figure_id, "figure id")->required()->check(CLI::IsMember(geneft::figure_ids()));
  figure->add_option("--run", run_dir, "directory holding the run's manifest.json")->required();
  figure->add_option("--out", figure_out, "where to write figure files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (figure->parsed()) {
      for (const auto& path : geneft::emit_figure_data(run_dir, figure_id, figure_out)) std::cout << path.string() << '\n';
      return 0;
    }
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) return run_experiment(name, options[name], commands.at(name));
    }
  } catch (const geneft::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const geneft::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
