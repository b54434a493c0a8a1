// Copyright 2026 The SCAPE-Lite Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// scape: train, ablate, demos, plot.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scape/demos.h"
#include "scape/env.h"
#include "scape/harness.h"

namespace {

// SCAPE_SEED, when set, overrides every seed given on the command line.
std::optional<std::uint64_t> SeedOverride() {
  const char* text = std::getenv("SCAPE_SEED");
  if (text == nullptr || *text == '\0') return std::nullopt;
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw scape::InvalidInput(std::string("SCAPE_SEED is not an integer: ") +
                              text);
  }
}

struct RunOptions {
  std::string env = "block";
  std::string condition = "c5";
  std::uint64_t seed = 0;
  int epochs = 50;
  int cycles = 50;
  int eval_episodes = 20;
  int demo_count = 25;
  std::string demo_path;
  std::string config_path;
  std::string out;
  bool no_uncertainty = false;
};

void AddBudgetOptions(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--epochs", o.epochs, "training epochs")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cycles", o.cycles, "cycles per epoch")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--eval-episodes", o.eval_episodes,
                  "evaluation episodes per epoch")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--demo-count", o.demo_count, "demonstrations to generate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--config", o.config_path,
                  "environment overrides, key = value per line");
  cmd->add_flag("--no-uncertainty", o.no_uncertainty,
                "disable noise, perturbation and control failure");
}

scape::ExperimentConfig BuildConfig(const RunOptions& o) {
  const scape::EnvId env = scape::ParseEnvId(o.env);
  scape::ExperimentConfig config = scape::MakeExperimentConfig(
      env, scape::ParseCondition(o.condition), o.seed, o.epochs);
  if (!o.config_path.empty()) {
    const scape::ActionMode mode = config.env.action_mode;
    config.env = scape::LoadConfigFile(o.config_path, config.env);
    config.env.action_mode = mode;
  }
  if (o.no_uncertainty) {
    config.env.uncertainty.measurement_noise = false;
    config.env.uncertainty.perturbation = false;
    config.env.uncertainty.control_failure = false;
  }
  config.cycles_per_epoch = o.cycles;
  config.eval_episodes = o.eval_episodes;
  config.demo_count = o.demo_count;
  config.demo_path = o.demo_path;
  config.out_dir = o.out;
  return config;
}

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw scape::InvalidInput("bad seed '" + item + "'");
    }
  }
  return seeds;
}

int Train(RunOptions o) {
  if (auto seed = SeedOverride()) o.seed = *seed;
  const scape::ExperimentConfig config = BuildConfig(o);
  const scape::ExperimentResult result = scape::RunExperiment(
      config, {.on_row = [](const scape::MetricsRow& r) {
        if (r.kind == "marker") {
          std::cout << "-- stage " << r.stage << " from env step "
                    << r.env_steps << "\n";
          return;
        }
        std::printf(
            "epoch %3d  task %.2f  safety %.2f  overall %.2f  explore_safety "
            "%.2f  sr %.2f  k %.1f  |F| %.1f\n",
            r.epoch, r.task, r.safety, r.overall, r.explore_safety,
            r.regulator_sr, r.mean_k, r.mean_force);
        std::fflush(stdout);
      }});
  if (result.aborted) {
    std::cerr << "run aborted: " << result.error << "\n";
    return 1;
  }
  return 0;
}

int Ablate(RunOptions o, const std::string& seeds_text) {
  std::vector<std::uint64_t> seeds = ParseSeeds(seeds_text);
  // A global override shifts the whole seed list.
  if (auto shift = SeedOverride()) {
    for (auto& s : seeds) s += *shift;
  }
  o.condition = "c5";
  scape::ExperimentConfig base = BuildConfig(o);
  const scape::AblationSummary summary =
      scape::RunAblation(base.env_id, seeds, base);
  std::ostringstream csv;
  scape::WriteAblationSummary(std::cout, csv, summary);
  if (!o.out.empty()) {
    std::ofstream out(std::filesystem::path(o.out) / "ablation.csv");
    out << csv.str();
  }
  for (const auto& s : summary.series) {
    if (!s.failed_seeds.empty()) return 1;
  }
  return 0;
}

int Demos(const std::string& env_name, int count, std::uint64_t seed,
          const std::string& out, bool no_uncertainty) {
  if (auto s = SeedOverride()) seed = *s;
  scape::EnvConfig config = scape::DefaultConfig(scape::ParseEnvId(env_name));
  if (no_uncertainty) {
    config.uncertainty.measurement_noise = false;
    config.uncertainty.perturbation = false;
    config.uncertainty.control_failure = false;
  }
  scape::Rng rng(seed);
  const scape::Demo demo = scape::GeneratePositionDemos(config, count, rng);
  scape::SaveDemo(out, demo);
  int intact = 0;
  for (const auto& e : demo.episodes) intact += e.final_flags.safety ? 1 : 0;
  std::cout << "wrote " << demo.episodes.size() << " demos to " << out << " ("
            << intact << " kept the object intact)\n";
  return 0;
}

int Plot(const std::string& in, std::string out) {
  if (out.empty()) {
    out = std::filesystem::is_directory(in)
              ? (std::filesystem::path(in) / "plots").string()
              : "plots";
  }
  const scape::PlotReport report =
      scape::EmitPlots(scape::FindMetricsFiles(in), out);
  for (const auto& p : report.written) std::cout << "wrote " << p << "\n";
  for (const auto& p : report.skipped) std::cerr << "skipped " << p << "\n";
  return report.written.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stiffness-control learning from augmented demonstrations"};
  app.require_subcommand(1);

  RunOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "train one condition");
  train_cmd->add_option("--env", train.env, "block | chip | fingers")
      ->required();
  train_cmd->add_option("--condition", train.condition,
                        "pos | c1 | c2 | c3 | c4 | c5 | hybrid")
      ->required();
  train_cmd->add_option("--seed", train.seed, "random seed");
  train_cmd->add_option("--out", train.out, "output directory")->required();
  train_cmd->add_option("--demos", train.demo_path, "demo file to load");
  AddBudgetOptions(train_cmd, train);

  RunOptions ablate;
  std::string seeds = "0,1,2";
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "run conditions 1-5");
  ablate_cmd->add_option("--env", ablate.env, "block | chip | fingers")
      ->required();
  ablate_cmd->add_option("--seeds", seeds, "comma-separated, at least 3");
  ablate_cmd->add_option("--out", ablate.out, "output directory");
  AddBudgetOptions(ablate_cmd, ablate);

  std::string demo_env = "block", demo_out;
  int demo_count = 25;
  std::uint64_t demo_seed = 0;
  bool demo_no_uncertainty = false;
  CLI::App* demos_cmd = app.add_subcommand("demos", "record expert demos");
  demos_cmd->add_option("--env", demo_env, "block | chip | fingers")
      ->required();
  demos_cmd->add_option("--count", demo_count, "episodes to keep")
      ->check(CLI::PositiveNumber);
  demos_cmd->add_option("--seed", demo_seed, "random seed");
  demos_cmd->add_option("--out", demo_out, "output file")->required();
  demos_cmd->add_flag("--no-uncertainty", demo_no_uncertainty,
                      "record without noise, perturbation or control failure");

  std::string plot_in, plot_out;
  CLI::App* plot_cmd = app.add_subcommand("plot", "render metrics as SVG");
  plot_cmd->add_option("--in", plot_in, "metrics file or run directory")
      ->required();
  plot_cmd->add_option("--out", plot_out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train_cmd) return Train(train);
    if (*ablate_cmd) return Ablate(ablate, seeds);
    if (*demos_cmd) {
      return Demos(demo_env, demo_count, demo_seed, demo_out,
                   demo_no_uncertainty);
    }
    if (*plot_cmd) return Plot(plot_in, plot_out);
  } catch (const scape::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
