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

#ifndef SCAPE_HARNESS_H_
#define SCAPE_HARNESS_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "scape/demos.h"
#include "scape/env.h"
#include "scape/learner.h"

namespace scape {

// pos: position control with c5 flags and plain demos. c1: no demos.
// c2: cloning only. c3: cloning + regulator. c4: cloning + Q-filter.
// c5: cloning + Q-filter + regulator. hybrid: imitation without the safety
// penalty, then pure RL with it.
enum class Condition { kPosControl, kC1, kC2, kC3, kC4, kC5, kHybrid };

std::string_view ConditionName(Condition c);
Condition ParseCondition(std::string_view name);

// Regulator threshold per environment: block 0.65, chip 0.85, fingers 0.65.
double DefaultSrRef(EnvId id);

struct ExperimentConfig {
  EnvId env_id = EnvId::kBlock;
  Condition condition = Condition::kC5;
  std::uint64_t seed = 0;
  int epochs = 50;
  int demo_count = 25;
  double sr_ref = 0.65;
  int cycles_per_epoch = 50;
  int episodes_per_cycle = 2;
  int eval_episodes = 20;
  int sr_window = 100;
  double hybrid_stage1_fraction = 0.5;
  std::string out_dir;    // empty: nothing written to disk
  std::string demo_path;  // empty: demos generated from the seed
  bool save_checkpoints = true;
  EnvConfig env;  // base environment, uncertainty toggles included
  LearnerConfig learner;
};

// Defaults for (env, condition): condition flags applied to the learner,
// position mode for pos.
ExperimentConfig MakeExperimentConfig(EnvId env_id, Condition condition,
                                      std::uint64_t seed, int epochs);

// Throws InvalidInput on an inconsistent config.
void ValidateExperiment(const ExperimentConfig& config);

// Stable 64-bit FNV-1a digest of the config's JSON form, as hex.
std::string ConfigHash(const ExperimentConfig& config);
std::string ExperimentJson(const ExperimentConfig& config);

struct MetricsRow {
  std::string kind = "epoch";  // "epoch" or "marker"
  int epoch = 0;
  int stage = 1;
  std::int64_t env_steps = 0;
  double task = 0.0;  // evaluation rates
  double safety = 0.0;
  double overall = 0.0;
  double explore_safety = 0.0;  // share of training episodes kept intact
  double explore_overall = 0.0;
  double regulator_sr = 0.0;
  double mean_q = 0.0;
  double mean_force = 0.0;  // estimated, evaluation
  double mean_k = 0.0;      // evaluation
  std::string source = "none";  // imitation buffer at the end of the epoch
  std::int64_t q_filter_evaluations = 0;  // cumulative
  std::int64_t demo_samples = 0;          // cumulative
  std::int64_t sil_samples = 0;           // cumulative
};

// Observed per training episode; lets tests audit invariants on every log.
struct EpisodeRecord {
  int epoch = 0;
  int stage = 1;
  bool evaluation = false;
  SuccessFlags flags;
  bool latched = true;  // intact never returned to true after a break
  bool reward_has_safety_term = false;
  double max_ground_truth_force = 0.0;
};

struct ExperimentHooks {
  std::function<void(const MetricsRow&)> on_row;
  std::function<void(const EpisodeRecord&)> on_episode;
  // Every imitation batch with the mask that gated it.
  std::function<void(const NetBundle&, const Preprocessor&,
                     const std::vector<const Transition*>&,
                     const std::vector<bool>&)>
      on_q_filter;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  LearnerCounters counters;
  bool aborted = false;
  std::string error;
};

// Trains and evaluates one (env, condition, seed). With out_dir set, writes
// metrics.csv (a JSON header line, then CSV), timing.csv, demos.jsonl and a
// checkpoint/ directory refreshed every epoch. A fault aborts the run with
// the rows so far flushed.
ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const ExperimentHooks& hooks = {});

// Same loop with a two-stage schedule; called by RunExperiment for hybrid.
ExperimentResult RunHybridBaseline(const ExperimentConfig& config,
                                   const ExperimentHooks& hooks = {});

void WriteMetrics(std::ostream& out, const ExperimentConfig& config,
                  const std::vector<MetricsRow>& rows);

struct MetricsFile {
  std::string header_json;
  std::vector<MetricsRow> rows;
};
MetricsFile ReadMetrics(std::istream& in);
MetricsFile LoadMetrics(const std::string& path);

struct AblationSeries {
  Condition condition = Condition::kC1;
  std::vector<std::uint64_t> seeds;
  std::vector<std::uint64_t> failed_seeds;
  std::vector<std::vector<MetricsRow>> runs;  // per successful seed
  Vec overall_mean, overall_std;              // per epoch
  Vec explore_safety_mean, explore_safety_std;
};

struct AblationSummary {
  EnvId env_id = EnvId::kBlock;
  std::vector<AblationSeries> series;  // c1 .. c5
};

// Runs c1..c5 for every seed (needs at least 3). `base` supplies budgets and
// output root; each run lands in out_dir/<condition>_seed<N>.
AblationSummary RunAblation(EnvId env_id, const std::vector<std::uint64_t>& seeds,
                            const ExperimentConfig& base);

// Mean +- std table plus per-epoch CSV series.
void WriteAblationSummary(std::ostream& table, std::ostream& csv,
                          const AblationSummary& summary);

// Writes SVG plots for every metrics.csv found under `in` (a file or a
// directory) into `out_dir`. Malformed files are skipped and listed in the
// report. Returns the paths written.
struct PlotReport {
  std::vector<std::string> written;
  std::vector<std::string> skipped;
};
PlotReport EmitPlots(const std::vector<std::string>& metrics_files,
                     const std::string& out_dir);
std::vector<std::string> FindMetricsFiles(const std::string& root);

}  // namespace scape

#endif  // SCAPE_HARNESS_H_
