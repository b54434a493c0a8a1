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

#include "scape/demos.h"

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "json_io.h"

namespace scape {

using nlohmann::json;

EnvConfig DemoConfig(const EnvConfig& base) {
  EnvConfig config = base;
  config.action_mode = ActionMode::kPosition;
  config.terminate_on_break = false;
  return config;
}

Demo GeneratePositionDemos(const EnvConfig& base, int count, Rng& rng) {
  if (count < 1) throw InvalidInput("demo count must be at least 1");
  const EnvConfig config = DemoConfig(base);
  Demo demo;
  demo.env_id = config.env_id;
  demo.action_kind = ActionKind::kPosition;
  demo.k_passive = config.k_passive;
  demo.k_max = config.k_max;
  const int max_attempts = 10 * count;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    ResetResult reset = Reset(config, rng);
    EnvState& state = reset.state;
    Episode episode;
    episode.goal = reset.goal;
    episode.observations.push_back(reset.observation);
    while (!state.done) {
      Vec action = ExpertAction(state);
      StepResult step = Step(state, action, rng);
      episode.actions.push_back(std::move(action));
      episode.observations.push_back(step.observation);
      episode.rewards.push_back(step.reward);
      episode.intact.push_back(state.intact);
      episode.dones.push_back(step.done);
      episode.final_flags = step.flags;
    }
    if (episode.final_flags.task) {
      demo.episodes.push_back(std::move(episode));
      if (static_cast<int>(demo.episodes.size()) == count) return demo;
    }
  }
  throw GenerationError("expert reached the kinematic goal in " +
                        std::to_string(demo.episodes.size()) + " of " +
                        std::to_string(max_attempts) + " attempts, needed " +
                        std::to_string(count));
}

Demo AugmentDemo(const Demo& demo, double k_passive) {
  if (demo.action_kind != ActionKind::kPosition) {
    throw InvalidInput("demo is already in stiffness form");
  }
  Demo out = demo;
  out.action_kind = ActionKind::kStiffness;
  out.k_passive = k_passive;
  for (Episode& episode : out.episodes) {
    for (Vec& action : episode.actions) {
      action.push_back(0.0);  // dk
      action.push_back(0.0);  // dk_lim
    }
    for (Observation& obs : episode.observations) {
      obs.has_stiffness = true;
      obs.k = k_passive;
      obs.k_lim = demo.k_max;
    }
  }
  return out;
}

Demo ProjectToPosition(const Demo& demo) {
  if (demo.action_kind != ActionKind::kStiffness) {
    throw InvalidInput("demo is already in position form");
  }
  Demo out = demo;
  out.action_kind = ActionKind::kPosition;
  for (Episode& episode : out.episodes) {
    for (Vec& action : episode.actions) action.resize(action.size() - 2);
    for (Observation& obs : episode.observations) {
      obs.has_stiffness = false;
      obs.k = demo.k_passive;
      obs.k_lim = demo.k_passive;
    }
  }
  return out;
}

void WriteDemo(std::ostream& out, const Demo& demo) {
  json header = {
      {"env_id", EnvName(demo.env_id)},
      {"action_kind",
       demo.action_kind == ActionKind::kPosition ? "position" : "stiffness"},
      {"k_passive", demo.k_passive},
      {"k_max", demo.k_max},
      {"count", demo.episodes.size()}};
  out << header.dump() << "\n";
  for (const Episode& episode : demo.episodes) {
    json line;
    line["goal"] = episode.goal.value;
    json observations = json::array();
    for (const Observation& obs : episode.observations) {
      observations.push_back(internal::ToJson(obs));
    }
    line["observations"] = std::move(observations);
    line["actions"] = episode.actions;
    line["rewards"] = episode.rewards;
    line["intact"] = episode.intact;
    line["dones"] = episode.dones;
    line["final"] = internal::ToJson(episode.final_flags);
    out << line.dump() << "\n";
  }
}

Demo ReadDemo(std::istream& in) {
  std::string text;
  if (!std::getline(in, text)) throw InvalidInput("demo file is empty");
  Demo demo;
  std::size_t count = 0;
  try {
    const json header = json::parse(text);
    demo.env_id = ParseEnvId(header.at("env_id").get<std::string>());
    const std::string kind = header.at("action_kind").get<std::string>();
    if (kind == "position") {
      demo.action_kind = ActionKind::kPosition;
    } else if (kind == "stiffness") {
      demo.action_kind = ActionKind::kStiffness;
    } else {
      throw InvalidInput("unknown action_kind '" + kind + "'");
    }
    demo.k_passive = header.at("k_passive").get<double>();
    demo.k_max = header.value("k_max", demo.k_passive);
    count = header.at("count").get<std::size_t>();
    while (std::getline(in, text)) {
      if (text.empty()) continue;
      const json line = json::parse(text);
      Episode episode;
      episode.goal.value = line.at("goal").get<Vec>();
      for (const json& obs : line.at("observations")) {
        episode.observations.push_back(internal::ObservationFromJson(obs));
      }
      episode.actions = line.at("actions").get<std::vector<Vec>>();
      episode.rewards = line.at("rewards").get<Vec>();
      episode.intact = line.at("intact").get<std::vector<bool>>();
      episode.dones = line.at("dones").get<std::vector<bool>>();
      episode.final_flags = internal::FlagsFromJson(line.at("final"));
      if (episode.observations.size() != episode.actions.size() + 1) {
        throw InvalidInput("demo episode has mismatched observations");
      }
      demo.episodes.push_back(std::move(episode));
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed demo file: ") + e.what());
  }
  if (demo.episodes.size() != count) {
    throw InvalidInput("demo header promises " + std::to_string(count) +
                       " episodes, file has " +
                       std::to_string(demo.episodes.size()));
  }
  const std::size_t dim =
      demo.episodes.empty() || demo.episodes[0].actions.empty()
          ? 0
          : demo.episodes[0].actions[0].size();
  for (const Episode& episode : demo.episodes) {
    for (const Vec& action : episode.actions) {
      if (action.size() != dim) {
        throw InvalidInput("demo episodes disagree on action dimension");
      }
    }
  }
  return demo;
}

void SaveDemo(const std::string& path, const Demo& demo) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write demo file " + path);
  WriteDemo(out, demo);
}

Demo LoadDemo(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open demo file " + path);
  return ReadDemo(in);
}

}  // namespace scape
