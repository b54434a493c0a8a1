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

#ifndef SCAPE_SRC_ENV_INTERNAL_H_
#define SCAPE_SRC_ENV_INTERNAL_H_

#include <span>

#include "scape/env.h"

namespace scape::internal {

constexpr double kGravity = 9.81;

// Each task implements the same five hooks; env.cc owns the shared step loop.
struct TaskHooks {
  // Places actuators, object and goal. Stiffness and noise are set by the
  // caller afterwards.
  void (*reset)(EnvState& state, Rng& rng);
  // Turns the normalized pose part of an executed action into setpoints.
  void (*apply_pose)(EnvState& state, std::span<const double> pose);
  // Advances one physics substep of length h and refreshes
  // state.contact_normal. Returns the ground-truth force on the object.
  double (*substep)(EnvState& state, double h);
  // Fills kinematics, estimated force, joint velocity and achieved goal.
  void (*observe)(const EnvState& state, Observation& obs);
  // Whether the object is currently held (perturbations apply only then).
  bool (*held)(const EnvState& state);
};

const TaskHooks& BlockHooks();
const TaskHooks& ChipHooks();
const TaskHooks& FingersHooks();

// Indices of the joints whose stiffness the policy modulates.
std::span<const int> GraspJoints(EnvId id);

// Number of measured object-pose components that receive noise.
int NoiseDim(EnvId id);

}  // namespace scape::internal

#endif  // SCAPE_SRC_ENV_INTERNAL_H_
