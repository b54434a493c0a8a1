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

#ifndef SCAPE_DEMOS_H_
#define SCAPE_DEMOS_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "scape/common.h"
#include "scape/env.h"

namespace scape {

// One recorded episode. observations has one more entry than actions; entry
// t + 1 is the observation after actions[t]. Actions are the commanded ones,
// before any control failure replaced them.
struct Episode {
  Goal goal;
  std::vector<Observation> observations;
  std::vector<Vec> actions;
  std::vector<double> rewards;
  std::vector<bool> intact;  // object intact after each step
  std::vector<bool> dones;
  SuccessFlags final_flags;

  int length() const { return static_cast<int>(actions.size()); }
};

enum class ActionKind { kPosition, kStiffness };

struct Demo {
  EnvId env_id = EnvId::kBlock;
  ActionKind action_kind = ActionKind::kPosition;
  double k_passive = 0.0;  // stiffness the recording ran at
  double k_max = 0.0;
  std::vector<Episode> episodes;
};

// Hand-coded waypoint controller (approach, close fully, transport, hold).
// Reads the true simulator state and ignores fragility. Returns the pose
// part of an action in [-1, 1].
Vec ExpertAction(const EnvState& state);

// Config the expert records under: position actions, uncertainties as in
// `base`, and no early termination on breakage.
EnvConfig DemoConfig(const EnvConfig& base);

// Runs the expert until `count` episodes reach the kinematic goal. Throws
// InvalidInput for count < 1 and GenerationError after 10 * count attempts.
Demo GeneratePositionDemos(const EnvConfig& base, int count, Rng& rng);

// Lifts a position demo into stiffness form: zero (dk, dk_lim) appended to
// every action, observations report k = k_passive and k_lim = k_max. Throws
// InvalidInput on an already augmented demo.
Demo AugmentDemo(const Demo& demo, double k_passive);

// Inverse of AugmentDemo.
Demo ProjectToPosition(const Demo& demo);

// JSON lines: a header {env_id, action_kind, k_passive, k_max, count}, then
// one episode per line.
void WriteDemo(std::ostream& out, const Demo& demo);
Demo ReadDemo(std::istream& in);
void SaveDemo(const std::string& path, const Demo& demo);
Demo LoadDemo(const std::string& path);

}  // namespace scape

#endif  // SCAPE_DEMOS_H_
