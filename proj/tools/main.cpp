#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lightcorners/commands.hpp"
#include "lightcorners/config.hpp"
#include "lightcorners/errors.hpp"

namespace fs = std::filesystem;
using namespace lightcorners;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string context;
  bool augment = false;
  bool train_noise = false;
  std::string out;
  bool force = false;
  std::string data;
  std::string run;
  std::vector<std::string> set;
  bool noisy = false;
  std::size_t limit = 16;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return 3;
    case ErrorKind::Validation: return 4;
    case ErrorKind::Config: return 5;
    case ErrorKind::Io: return 6;
    case ErrorKind::Numeric: return 7;
  }
  return 1;
}

ExperimentConfig resolve_config(const Options& o, const std::string& command) {
  ExperimentConfig config;
  const bool uses_run = command == "eval" || command == "predict" || command == "render";
  if (!o.config_path.empty()) {
    config = load_config(o.config_path);
  } else if (uses_run) {
    const fs::path run = o.run.empty() ? config.output_dir : fs::path(o.run);
    if (fs::exists(run / kRunConfigFile)) config = load_config(run / kRunConfigFile);
  }
  for (const auto& assignment : o.set) {
    const auto eq = assignment.find('=');
    require(eq != std::string::npos, ErrorKind::Config, "--set expects key=value, got '" + assignment + "'");
    set_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
  }
  if (!o.data.empty()) config.data_dir = o.data;
  if (!o.context.empty()) config.crop.mode = parse_context_mode(o.context);
  if (o.augment) config.train.augment = true;
  if (o.train_noise) config.train_noise = true;
  if (o.seed) {
    if (command == "gen-synth") config.synth.seed = *o.seed;
    if (command == "prepare") config.split.seed = *o.seed;
    if (command == "train") config.train.seed = *o.seed;
  }
  config.validate();
  return config;
}

void run_command(const Options& o, const std::string& command) {
  const auto config = resolve_config(o, command);
  const fs::path run_dir = o.run.empty() ? config.output_dir : fs::path(o.run);
  if (command == "gen-synth") {
    cmd_gen_synth(config, o.out.empty() ? config.data_dir : fs::path(o.out), o.force, std::cout);
  } else if (command == "prepare") {
    cmd_prepare(config, config.data_dir, o.force, std::cout);
  } else if (command == "train") {
    cmd_train(config, o.out.empty() ? config.output_dir : fs::path(o.out), o.force, std::cout);
  } else if (command == "eval") {
    cmd_eval(config, run_dir, o.out.empty() ? run_dir : fs::path(o.out), std::cout);
  } else if (command == "predict") {
    cmd_predict(config, run_dir, o.out.empty() ? run_dir / kPredictionsFile : fs::path(o.out), o.noisy, std::cout);
  } else if (command == "render") {
    cmd_render(config, run_dir, o.out.empty() ? run_dir / "overlays" : fs::path(o.out), o.limit, o.noisy,
               std::cout);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicle light corner regression: data generation, training, evaluation"};
  app.require_subcommand(1);
  Options o;

  const auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", o.set, "override a config key (key=value), repeatable");
    sub->add_option("--data", o.data, "dataset directory (data.dir)");
    sub->add_option("--out", o.out, "output location");
  };

  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic dataset");
  add_common(gen);
  gen->add_option("--seed", o.seed, "synthetic scene seed");
  gen->add_flag("--force", o.force, "replace an existing dataset");

  auto* prepare = app.add_subcommand("prepare", "write the split manifest for an annotated dataset");
  add_common(prepare);
  prepare->add_option("--seed", o.seed, "split seed");
  prepare->add_flag("--force", o.force, "replace an existing manifest");

  auto* train = app.add_subcommand("train", "train the four light models");
  add_common(train);
  train->add_option("--seed", o.seed, "training seed");
  train->add_option("--context", o.context, "crop context")->check(CLI::IsMember({"scene", "vehicle"}));
  train->add_flag("--augment", o.augment, "add horizontally flipped crops");
  train->add_flag("--train-noise", o.train_noise, "perturb training crop centers");
  train->add_flag("--force", o.force, "replace existing checkpoints");

  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"eval", "score checkpoints on the clean and noisy test split"},
           {"predict", "write predicted corners for the test split"},
           {"render", "draw prediction overlays for test crops"}}) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    sub->add_option("--run", o.run, "directory holding the checkpoints (default output.dir)");
    sub->add_option("--context", o.context, "crop context")->check(CLI::IsMember({"scene", "vehicle"}));
    if (name != "eval") sub->add_flag("--noisy", o.noisy, "use the frozen noisy centers");
    if (name == "render") sub->add_option("--limit", o.limit, "number of overlays");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    run_command(o, app.get_subcommands().front()->get_name());
  } catch (const Error& e) {
    std::cerr << "lightcorners: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "lightcorners: unexpected failure: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
