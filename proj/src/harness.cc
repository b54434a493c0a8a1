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

#include "scape/harness.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "scape/replay.h"

namespace scape {

using nlohmann::json;

std::string_view ConditionName(Condition c) {
  switch (c) {
    case Condition::kPosControl:
      return "pos";
    case Condition::kC1:
      return "c1";
    case Condition::kC2:
      return "c2";
    case Condition::kC3:
      return "c3";
    case Condition::kC4:
      return "c4";
    case Condition::kC5:
      return "c5";
    case Condition::kHybrid:
      return "hybrid";
  }
  return "";
}

Condition ParseCondition(std::string_view name) {
  for (Condition c : {Condition::kPosControl, Condition::kC1, Condition::kC2,
                      Condition::kC3, Condition::kC4, Condition::kC5,
                      Condition::kHybrid}) {
    if (ConditionName(c) == name) return c;
  }
  throw InvalidInput("unknown condition '" + std::string(name) +
                     "' (expected pos, c1..c5 or hybrid)");
}

double DefaultSrRef(EnvId id) {
  return id == EnvId::kChip ? 0.85 : 0.65;
}

ExperimentConfig MakeExperimentConfig(EnvId env_id, Condition condition,
                                      std::uint64_t seed, int epochs) {
  ExperimentConfig c;
  c.env_id = env_id;
  c.condition = condition;
  c.seed = seed;
  c.epochs = epochs;
  c.sr_ref = DefaultSrRef(env_id);
  c.env = DefaultConfig(env_id);
  LearnerConfig& l = c.learner;
  switch (condition) {
    case Condition::kC1:
      l.bc_enabled = false;
      l.q_filter_enabled = false;
      l.regulator_enabled = false;
      break;
    case Condition::kC2:
      l.q_filter_enabled = false;
      l.regulator_enabled = false;
      break;
    case Condition::kC3:
      l.q_filter_enabled = false;
      break;
    case Condition::kC4:
      l.regulator_enabled = false;
      break;
    case Condition::kPosControl:
      c.env.action_mode = ActionMode::kPosition;
      break;
    case Condition::kC5:
    case Condition::kHybrid:
      break;
  }
  return c;
}

void ValidateExperiment(const ExperimentConfig& c) {
  if (c.env.env_id != c.env_id) {
    throw InvalidInput("experiment and environment disagree on env_id");
  }
  if (c.epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (c.cycles_per_epoch < 1 || c.episodes_per_cycle < 1) {
    throw InvalidInput("cycles and episodes per cycle must be >= 1");
  }
  if (c.eval_episodes < 1) throw InvalidInput("eval_episodes must be >= 1");
  if (c.sr_window < 1) throw InvalidInput("sr_window must be >= 1");
  if (!(c.sr_ref >= 0.0 && c.sr_ref <= 1.0)) {
    throw InvalidInput("sr_ref must lie in [0, 1]");
  }
  const bool needs_demos =
      c.condition != Condition::kC1 && c.learner.bc_enabled;
  if (needs_demos && c.demo_count < 1 && c.demo_path.empty()) {
    throw InvalidInput("condition needs demos but demo_count < 1");
  }
  if (c.learner.batch_size < 1 || c.learner.imitation_batch_size < 1 ||
      c.learner.updates_per_cycle < 0) {
    throw InvalidInput("batch sizes must be >= 1");
  }
  if (!(c.learner.gamma >= 0.0 && c.learner.gamma < 1.0)) {
    throw InvalidInput("gamma must lie in [0, 1)");
  }
  if (c.condition == Condition::kHybrid &&
      !(c.hybrid_stage1_fraction > 0.0 && c.hybrid_stage1_fraction < 1.0)) {
    throw InvalidInput("hybrid stage-1 fraction must lie in (0, 1)");
  }
  ValidateConfig(c.env);
}

std::string ExperimentJson(const ExperimentConfig& c) {
  const LearnerConfig& l = c.learner;
  json j = {{"env", std::string(EnvName(c.env_id))},
            {"condition", std::string(ConditionName(c.condition))},
            {"seed", c.seed},
            {"epochs", c.epochs},
            {"demo_count", c.demo_count},
            {"sr_ref", c.sr_ref},
            {"cycles_per_epoch", c.cycles_per_epoch},
            {"episodes_per_cycle", c.episodes_per_cycle},
            {"eval_episodes", c.eval_episodes},
            {"sr_window", c.sr_window},
            {"hybrid_stage1_fraction", c.hybrid_stage1_fraction},
            {"demo_path", c.demo_path},
            {"env_config", FormatConfig(c.env)},
            {"learner",
             {{"hidden", l.hidden},
              {"batch_size", l.batch_size},
              {"imitation_batch_size", l.imitation_batch_size},
              {"gamma", l.gamma},
              {"polyak", l.polyak},
              {"actor_lr", l.actor_lr},
              {"critic_lr", l.critic_lr},
              {"bc_weight", l.bc_weight},
              {"action_l2", l.action_l2},
              {"noise_scale", l.noise_scale},
              {"random_action_prob", l.random_action_prob},
              {"bc_enabled", l.bc_enabled},
              {"q_filter_enabled", l.q_filter_enabled},
              {"regulator_enabled", l.regulator_enabled},
              {"updates_per_cycle", l.updates_per_cycle},
              {"k_future", l.k_future},
              {"clip_obs", l.clip_obs},
              {"norm_eps", l.norm_eps}}}};
  return j.dump();
}

std::string ConfigHash(const ExperimentConfig& c) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : ExperimentJson(c)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

constexpr const char* kColumns =
    "kind,epoch,stage,env_steps,task,safety,overall,explore_safety,"
    "explore_overall,regulator_sr,mean_q,mean_force,mean_k,source,"
    "q_filter_evaluations,demo_samples,sil_samples";

void WriteRow(std::ostream& out, const MetricsRow& r) {
  out << r.kind << ',' << r.epoch << ',' << r.stage << ',' << r.env_steps
      << ',' << Num(r.task) << ',' << Num(r.safety) << ',' << Num(r.overall)
      << ',' << Num(r.explore_safety) << ',' << Num(r.explore_overall) << ','
      << Num(r.regulator_sr) << ',' << Num(r.mean_q) << ','
      << Num(r.mean_force) << ',' << Num(r.mean_k) << ',' << r.source << ','
      << r.q_filter_evaluations << ',' << r.demo_samples << ','
      << r.sil_samples << '\n';
}

struct EvalAccumulator {
  double q = 0.0;
  double force = 0.0;
  double k = 0.0;
  std::int64_t steps = 0;
};

using PolicyFn = std::function<Vec(const Observation&, const Goal&)>;

Episode RunEpisode(const EnvConfig& env, Rng& env_rng, const PolicyFn& policy,
                   EpisodeRecord* record,
                   const std::function<void(const Observation&, const Goal&,
                                            const Vec&)>& per_step = {}) {
  ResetResult reset = Reset(env, env_rng);
  EnvState& state = reset.state;
  Episode episode;
  episode.goal = reset.goal;
  episode.observations.push_back(reset.observation);
  bool was_broken = false;
  bool latched = true;
  bool safety_term = false;
  double max_force = 0.0;
  while (!state.done) {
    const Observation& obs = episode.observations.back();
    Vec action = policy(obs, episode.goal);
    if (per_step) per_step(obs, episode.goal, action);
    StepResult step = Step(state, action, env_rng);
    const double r_task =
        KinematicGoalMet(step.observation.achieved_goal, episode.goal, env)
            ? 0.0
            : -1.0;
    if (step.reward != r_task) safety_term = true;
    if (was_broken && state.intact) latched = false;
    was_broken = was_broken || !state.intact;
    max_force = std::max(max_force, step.ground_truth_force);
    episode.actions.push_back(std::move(action));
    episode.observations.push_back(std::move(step.observation));
    episode.rewards.push_back(step.reward);
    episode.intact.push_back(state.intact);
    episode.dones.push_back(step.done);
    episode.final_flags = step.flags;
  }
  if (record != nullptr) {
    record->flags = episode.final_flags;
    record->latched = latched;
    record->reward_has_safety_term = safety_term;
    record->max_ground_truth_force = max_force;
  }
  return episode;
}

std::ofstream OpenOut(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

// One training run. Stage 2 only exists for the hybrid baseline.
class Runner {
 public:
  Runner(const ExperimentConfig& config, const ExperimentHooks& hooks)
      : config_(config), hooks_(hooks), buffers_(100000, 200000) {
    ValidateExperiment(config_);
    Rng master(config_.seed);
    demo_rng_ = Rng(master.NextSeed());
    Rng init_rng(master.NextSeed());
    env_rng_ = Rng(master.NextSeed());
    explore_rng_ = Rng(master.NextSeed());
    sample_rng_ = Rng(master.NextSeed());
    eval_seed_ = master.NextSeed();

    env_ = config_.env;
    learner_ = config_.learner;
    hybrid_ = config_.condition == Condition::kHybrid;
    if (hybrid_) {
      env_.safety_reward = false;
      learner_.bc_enabled = true;
      learner_.q_filter_enabled = true;
      learner_.regulator_enabled = false;
      stage1_epochs_ = std::max(
          1, static_cast<int>(std::lround(config_.epochs *
                                          config_.hybrid_stage1_fraction)));
    }
    use_demos_ = config_.condition != Condition::kC1;

    const ResetResult probe_reset = Reset(env_, init_rng);
    const Observation& probe = probe_reset.observation;
    prep_.k_max = env_.k_max;
    prep_.obs = Normalizer(static_cast<int>(probe.Features(env_.k_max).size()),
                           learner_.norm_eps, learner_.clip_obs);
    prep_.goal = Normalizer(static_cast<int>(probe_reset.goal.value.size()),
                            learner_.norm_eps, learner_.clip_obs);
    nets_ = InitNets(prep_.input_size(), ActionDim(env_), learner_, init_rng);
    lower_bound_ = CriticTargetLowerBound(env_, learner_.gamma);

    if (!config_.out_dir.empty()) {
      out_dir_ = config_.out_dir;
      std::filesystem::create_directories(out_dir_);
    }
  }

  ExperimentResult Run() {
    ExperimentResult result;
    std::optional<std::ofstream> metrics;
    std::optional<std::ofstream> timing;
    if (!out_dir_.empty()) {
      metrics.emplace(OpenOut(out_dir_ / "metrics.csv"));
      timing.emplace(OpenOut(out_dir_ / "timing.csv"));
      *metrics << ExperimentJson(config_) << '\n' << kColumns << '\n';
      *metrics << std::flush;
      *timing << "epoch,seconds\n";
    }
    auto emit = [&](const MetricsRow& row) {
      result.rows.push_back(row);
      if (metrics) {
        WriteRow(*metrics, row);
        metrics->flush();
      }
      if (hooks_.on_row) hooks_.on_row(row);
    };
    try {
      if (use_demos_) LoadDemos();
      for (int epoch = 0; epoch < config_.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        if (hybrid_ && epoch == stage1_epochs_) {
          SwitchToStage2();
          MetricsRow marker;
          marker.kind = "marker";
          marker.epoch = epoch;
          marker.stage = 2;
          marker.env_steps = env_steps_;
          marker.regulator_sr = sr_;
          FillCounters(marker);
          emit(marker);
        }
        MetricsRow row = TrainEpoch(epoch);
        Evaluate(epoch, row);
        emit(row);
        if (!out_dir_.empty() && config_.save_checkpoints) {
          json meta = {{"epoch", epoch},
                       {"sr", sr_},
                       {"eval_overall", row.overall},
                       {"config_hash", ConfigHash(config_)}};
          SaveCheckpoint((out_dir_ / "checkpoint").string(), nets_, prep_,
                         meta.dump());
        }
        if (timing) {
          const double seconds = std::chrono::duration<double>(
                                     std::chrono::steady_clock::now() - start)
                                     .count();
          *timing << epoch << ',' << Num(seconds) << '\n';
          timing->flush();
        }
      }
    } catch (const Error& e) {
      result.aborted = true;
      result.error = e.what();
    }
    result.counters = counters_;
    return result;
  }

 private:
  void LoadDemos() {
    Demo demo = config_.demo_path.empty()
                    ? GeneratePositionDemos(config_.env, config_.demo_count,
                                            demo_rng_)
                    : LoadDemo(config_.demo_path);
    if (demo.env_id != env_.env_id) {
      throw InvalidInput("demo file is for a different environment");
    }
    const bool position = env_.action_mode == ActionMode::kPosition;
    if (position && demo.action_kind == ActionKind::kStiffness) {
      demo = ProjectToPosition(demo);
    } else if (!position && demo.action_kind == ActionKind::kPosition) {
      demo = AugmentDemo(demo, env_.k_passive);
    }
    if (!out_dir_.empty()) SaveDemo((out_dir_ / "demos.jsonl").string(), demo);
    LoadDemoBuffer(buffers_, demo, env_);
    // Demos also seed the main buffer, relabeled like the agent's episodes.
    for (const Episode& episode : demo.episodes) Store(episode);
  }

  void Store(const Episode& episode) {
    const std::vector<Transition> added =
        StoreEpisode(buffers_, episode, learner_.k_future, env_, sample_rng_);
    for (const Transition& tr : added) prep_.Update(tr);
  }

  void SwitchToStage2() {
    stage_ = 2;
    env_ = config_.env;
    learner_.bc_enabled = false;
    learner_.q_filter_enabled = false;
    RecomputeRewards(buffers_.d_rl, env_);
    lower_bound_ = CriticTargetLowerBound(env_, learner_.gamma);
  }

  void FillCounters(MetricsRow& row) const {
    row.q_filter_evaluations = counters_.q_filter_evaluations;
    row.demo_samples = counters_.demo_samples;
    row.sil_samples = counters_.sil_samples;
  }

  MetricsRow TrainEpoch(int epoch) {
    int episodes = 0, intact = 0, overall = 0;
    const PolicyFn explore = [&](const Observation& o, const Goal& g) {
      return ExploreAction(PolicyAction(nets_, prep_, o, g), learner_,
                           explore_rng_);
    };
    for (int cycle = 0; cycle < config_.cycles_per_epoch; ++cycle) {
      for (int e = 0; e < config_.episodes_per_cycle; ++e) {
        EpisodeRecord record;
        record.epoch = epoch;
        record.stage = stage_;
        Episode episode = RunEpisode(env_, env_rng_, explore, &record);
        env_steps_ += episode.length();
        ++episodes;
        intact += record.flags.safety ? 1 : 0;
        overall += record.flags.overall ? 1 : 0;
        window_.push_back(record.flags.overall);
        if (static_cast<int>(window_.size()) > config_.sr_window) {
          window_.pop_front();
        }
        Store(episode);
        if (hooks_.on_episode) hooks_.on_episode(record);
      }
      for (int u = 0; u < learner_.updates_per_cycle; ++u) Update();
      TargetSoftUpdate(nets_, learner_.polyak);
      if (!nets_.actor.AllFinite() || !nets_.critic.AllFinite()) {
        throw NonFiniteError("network parameters became non-finite");
      }
      RefreshSr();
    }
    MetricsRow row;
    row.epoch = epoch;
    row.stage = stage_;
    row.env_steps = env_steps_;
    row.explore_safety = static_cast<double>(intact) / episodes;
    row.explore_overall = static_cast<double>(overall) / episodes;
    row.regulator_sr = sr_;
    row.source = source_;
    FillCounters(row);
    return row;
  }

  void RefreshSr() {
    int hits = 0;
    for (bool s : window_) hits += s ? 1 : 0;
    sr_ = window_.empty() ? 0.0 : static_cast<double>(hits) / window_.size();
  }

  void Update() {
    const std::vector<const Transition*> rl =
        SampleBatch(buffers_.d_rl, learner_.batch_size, sample_rng_);
    CriticUpdate(nets_, prep_, rl, learner_, lower_bound_, &counters_);
    std::vector<const Transition*> imitation;
    std::vector<bool> mask;
    if (use_demos_ && learner_.bc_enabled) {
      const BufferId requested = learner_.regulator_enabled
                                     ? SelectImitationSource(sr_, config_.sr_ref)
                                     : BufferId::kDemo;
      ImitationBatch batch = SampleImitation(
          buffers_, requested, learner_.imitation_batch_size, sample_rng_);
      const auto n = static_cast<std::int64_t>(batch.transitions.size());
      if (batch.source == BufferId::kDemo) {
        counters_.demo_samples += n;
      } else {
        counters_.sil_samples += n;
      }
      if (batch.fell_back) ++counters_.sil_fallbacks;
      source_ = std::string(BufferName(batch.source));
      imitation = std::move(batch.transitions);
      if (learner_.q_filter_enabled) {
        mask = QFilterMask(nets_, prep_, imitation);
        counters_.q_filter_evaluations += n;
        if (hooks_.on_q_filter) hooks_.on_q_filter(nets_, prep_, imitation, mask);
      } else {
        mask.assign(imitation.size(), true);
      }
    } else {
      source_ = "none";
    }
    ActorStep(nets_, prep_, rl, imitation, mask, learner_, &counters_);
    ++counters_.updates;
  }

  void Evaluate(int epoch, MetricsRow& row) {
    Rng eval_rng(eval_seed_ + static_cast<std::uint64_t>(epoch));
    EvalAccumulator acc;
    int task = 0, safety = 0, overall = 0;
    const PolicyFn greedy = [&](const Observation& o, const Goal& g) {
      return PolicyAction(nets_, prep_, o, g);
    };
    const auto per_step = [&](const Observation& o, const Goal& g,
                              const Vec& a) {
      acc.q += CriticValue(nets_, prep_, o, g, a);
      acc.force += Norm(o.estimated_force);
      acc.k += o.k;
      ++acc.steps;
    };
    for (int e = 0; e < config_.eval_episodes; ++e) {
      EpisodeRecord record;
      record.epoch = epoch;
      record.stage = stage_;
      record.evaluation = true;
      RunEpisode(env_, eval_rng, greedy, &record, per_step);
      task += record.flags.task ? 1 : 0;
      safety += record.flags.safety ? 1 : 0;
      overall += record.flags.overall ? 1 : 0;
      if (hooks_.on_episode) hooks_.on_episode(record);
    }
    const double n = config_.eval_episodes;
    row.task = task / n;
    row.safety = safety / n;
    row.overall = overall / n;
    const double steps = std::max<double>(1.0, static_cast<double>(acc.steps));
    row.mean_q = acc.q / steps;
    row.mean_force = acc.force / steps;
    row.mean_k = acc.k / steps;
  }

  const ExperimentConfig config_;
  const ExperimentHooks hooks_;
  EnvConfig env_;
  LearnerConfig learner_;
  bool hybrid_ = false;
  bool use_demos_ = false;
  int stage1_epochs_ = 0;
  int stage_ = 1;
  Rng demo_rng_, env_rng_, explore_rng_, sample_rng_;
  std::uint64_t eval_seed_ = 0;
  Preprocessor prep_;
  NetBundle nets_;
  BufferSet buffers_;
  LearnerCounters counters_;
  double lower_bound_ = 0.0;
  double sr_ = 0.0;
  std::deque<bool> window_;
  std::string source_ = "none";
  std::int64_t env_steps_ = 0;
  std::filesystem::path out_dir_;
};

}  // namespace

ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const ExperimentHooks& hooks) {
  return Runner(config, hooks).Run();
}

ExperimentResult RunHybridBaseline(const ExperimentConfig& config,
                                   const ExperimentHooks& hooks) {
  if (config.condition != Condition::kHybrid) {
    throw InvalidInput("RunHybridBaseline needs condition hybrid");
  }
  return Runner(config, hooks).Run();
}

void WriteMetrics(std::ostream& out, const ExperimentConfig& config,
                  const std::vector<MetricsRow>& rows) {
  out << ExperimentJson(config) << '\n' << kColumns << '\n';
  for (const MetricsRow& row : rows) WriteRow(out, row);
}

MetricsFile ReadMetrics(std::istream& in) {
  MetricsFile file;
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("metrics file is empty");
  try {
    file.header_json = json::parse(line).dump();
  } catch (const json::exception&) {
    throw InvalidInput("metrics header is not JSON");
  }
  if (!std::getline(in, line) || line != kColumns) {
    throw InvalidInput("metrics column header does not match");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 17) throw InvalidInput("metrics row has wrong arity");
    MetricsRow r;
    try {
      r.kind = f[0];
      r.epoch = std::stoi(f[1]);
      r.stage = std::stoi(f[2]);
      r.env_steps = std::stoll(f[3]);
      r.task = std::stod(f[4]);
      r.safety = std::stod(f[5]);
      r.overall = std::stod(f[6]);
      r.explore_safety = std::stod(f[7]);
      r.explore_overall = std::stod(f[8]);
      r.regulator_sr = std::stod(f[9]);
      r.mean_q = std::stod(f[10]);
      r.mean_force = std::stod(f[11]);
      r.mean_k = std::stod(f[12]);
      r.source = f[13];
      r.q_filter_evaluations = std::stoll(f[14]);
      r.demo_samples = std::stoll(f[15]);
      r.sil_samples = std::stoll(f[16]);
    } catch (const std::logic_error&) {
      throw InvalidInput("metrics row has a malformed number");
    }
    file.rows.push_back(std::move(r));
  }
  return file;
}

MetricsFile LoadMetrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  return ReadMetrics(in);
}

namespace {

void MeanStd(const std::vector<double>& v, double& mean, double& stddev) {
  mean = 0.0;
  stddev = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= v.size();
  for (double x : v) stddev += (x - mean) * (x - mean);
  stddev = std::sqrt(stddev / v.size());
}

std::vector<MetricsRow> EpochRows(const std::vector<MetricsRow>& rows) {
  std::vector<MetricsRow> out;
  for (const MetricsRow& r : rows) {
    if (r.kind == "epoch") out.push_back(r);
  }
  return out;
}

}  // namespace

AblationSummary RunAblation(EnvId env_id,
                            const std::vector<std::uint64_t>& seeds,
                            const ExperimentConfig& base) {
  if (seeds.size() < 3) throw InvalidInput("ablation needs at least 3 seeds");
  AblationSummary summary;
  summary.env_id = env_id;
  for (Condition c : {Condition::kC1, Condition::kC2, Condition::kC3,
                      Condition::kC4, Condition::kC5}) {
    AblationSeries series;
    series.condition = c;
    series.seeds = seeds;
    for (std::uint64_t seed : seeds) {
      ExperimentConfig config =
          MakeExperimentConfig(env_id, c, seed, base.epochs);
      const LearnerConfig flags = config.learner;
      config.learner = base.learner;
      config.learner.bc_enabled = flags.bc_enabled;
      config.learner.q_filter_enabled = flags.q_filter_enabled;
      config.learner.regulator_enabled = flags.regulator_enabled;
      config.demo_count = base.demo_count;
      config.cycles_per_epoch = base.cycles_per_epoch;
      config.episodes_per_cycle = base.episodes_per_cycle;
      config.eval_episodes = base.eval_episodes;
      config.save_checkpoints = base.save_checkpoints;
      config.env.uncertainty = base.env.uncertainty;
      if (!base.out_dir.empty()) {
        config.out_dir = (std::filesystem::path(base.out_dir) /
                          (std::string(ConditionName(c)) + "_seed" +
                           std::to_string(seed)))
                             .string();
      }
      ExperimentResult result = RunExperiment(config);
      if (result.aborted) {
        series.failed_seeds.push_back(seed);
      } else {
        series.runs.push_back(EpochRows(result.rows));
      }
    }
    std::size_t epochs = 0;
    for (const auto& run : series.runs) epochs = std::max(epochs, run.size());
    for (std::size_t e = 0; e < epochs; ++e) {
      std::vector<double> overall, safety;
      for (const auto& run : series.runs) {
        if (e < run.size()) {
          overall.push_back(run[e].overall);
          safety.push_back(run[e].explore_safety);
        }
      }
      double m, s;
      MeanStd(overall, m, s);
      series.overall_mean.push_back(m);
      series.overall_std.push_back(s);
      MeanStd(safety, m, s);
      series.explore_safety_mean.push_back(m);
      series.explore_safety_std.push_back(s);
    }
    summary.series.push_back(std::move(series));
  }
  return summary;
}

void WriteAblationSummary(std::ostream& table, std::ostream& csv,
                          const AblationSummary& summary) {
  table << "env " << EnvName(summary.env_id) << "\n";
  table << "condition  final_overall        explore_safety(last10)  failed\n";
  for (const AblationSeries& s : summary.series) {
    const std::size_t n = s.overall_mean.size();
    double tail = 0.0, tail_std = 0.0;
    const std::size_t from = n > 10 ? n - 10 : 0;
    for (std::size_t e = from; e < n; ++e) {
      tail += s.explore_safety_mean[e];
      tail_std += s.explore_safety_std[e];
    }
    if (n > from) {
      tail /= (n - from);
      tail_std /= (n - from);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-9s  %.3f +- %.3f        %.3f +- %.3f         %zu\n",
                  std::string(ConditionName(s.condition)).c_str(),
                  n ? s.overall_mean[n - 1] : 0.0,
                  n ? s.overall_std[n - 1] : 0.0, tail, tail_std,
                  s.failed_seeds.size());
    table << buf;
  }
  csv << "condition,epoch,overall_mean,overall_std,explore_safety_mean,"
         "explore_safety_std\n";
  for (const AblationSeries& s : summary.series) {
    for (std::size_t e = 0; e < s.overall_mean.size(); ++e) {
      csv << ConditionName(s.condition) << ',' << e << ','
          << Num(s.overall_mean[e]) << ',' << Num(s.overall_std[e]) << ','
          << Num(s.explore_safety_mean[e]) << ','
          << Num(s.explore_safety_std[e]) << '\n';
    }
  }
}

}  // namespace scape
