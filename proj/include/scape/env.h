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

#ifndef SCAPE_ENV_H_
#define SCAPE_ENV_H_

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scape/common.h"
#include "scape/physics.h"

namespace scape {

// BlockLite: planar pick-and-place with a two-finger parallel gripper.
// ChipLite: pressing a thin chip against a wall and sliding it upward.
// FingersLite: two polar fingers rotating an elastically grounded block.
enum class EnvId { kBlock, kChip, kFingers };

// kStiffness appends (dk, dk_lim) to the pose action; kPosition holds the
// grasp stiffness at k_passive.
enum class ActionMode { kStiffness, kPosition };

std::string_view EnvName(EnvId id);
EnvId ParseEnvId(std::string_view name);

struct UncertaintyConfig {
  bool measurement_noise = true;
  bool perturbation = true;
  bool control_failure = true;
  double noise_amplitude = 0.01;         // m (block, chip) or rad (fingers)
  double perturbation_amplitude = 0.5;   // m/s or rad/s
  double control_failure_prob = 0.10;
};

// Per-reset parameter variation, FingersLite only.
struct RandomizationConfig {
  bool enabled = false;
  double band_stiffness_lo = 0.0;  // N/m
  double band_stiffness_hi = 100.0;
  double width_lo = 0.015;  // m
  double width_hi = 0.025;
  double offset_lo = -0.005;  // m
  double offset_hi = 0.005;
};

struct EnvConfig {
  EnvId env_id = EnvId::kBlock;
  ActionMode action_mode = ActionMode::kStiffness;

  // Reward: R = r_task - alpha * |F| - beta * |qdot|.
  double alpha = 2e-3;
  double beta = 0.0;
  double d = 0.05;                 // kinematic success threshold
  double velocity_threshold = 0.02;  // ChipLite resting speed, m/s
  bool safety_reward = true;       // false drops the alpha/beta terms

  double fragility = 300.0;  // N
  double k_passive = 250.0;  // grasp-direction stiffness
  double k_max = 250.0;
  double k_floor_ratio = 0.01;
  double stiffness_rate = 0.2;  // |dk| = 1 changes k by this * k_max

  double dt = 0.02;
  int substeps = 4;
  double force_tau = 0.05;
  int horizon = 50;
  bool terminate_on_break = true;

  // Grasp actuator(s).
  double actuator_mass = 0.4;
  double actuator_damping = 20.0;
  double control_lo = -1.0;
  double control_hi = 1.0;
  double grip_scale = 0.25;  // setpoint change per unit grip action
  double move_scale = 0.05;  // effector/arm setpoint change per unit action

  // Secondary actuators: the chip forearm and the finger tangential joints.
  double aux_stiffness = 250.0;
  double aux_mass = 0.4;
  double aux_damping = 20.0;

  double object_mass = 0.2;  // kg (ChipLite, BlockLite); inertia for fingers
  double friction = 1.0;
  double wall_friction = 1.0;
  double wall_friction_scale = 0.3;  // effective share of wall_friction
  double contact_stiffness = 5000.0;
  double contact_damping = 20.0;

  // FingersLite nominal object; overwritten by domain randomization.
  double band_stiffness = 50.0;  // N/m
  double object_width = 0.020;   // m
  double object_offset = 0.0;    // m, perpendicular to the grasp

  double velocity_bound = 0.0;  // bound on |qdot| used for value clipping

  UncertaintyConfig uncertainty;
  RandomizationConfig randomization;

  double k_floor() const { return k_floor_ratio * k_passive; }
};

EnvConfig DefaultConfig(EnvId id);

// Validates the documented invariants; throws InvalidInput.
void ValidateConfig(const EnvConfig& config);

// Plain-text `key = value` overrides, '#' starts a comment. Unknown keys are
// rejected. `env` may only appear first and resets to that env's defaults.
EnvConfig ParseConfig(std::string_view text, EnvConfig base);
EnvConfig LoadConfigFile(const std::string& path, EnvConfig base);
std::string FormatConfig(const EnvConfig& config);

// Upper bound on |F| under the config, used for return clipping.
double ForceBound(const EnvConfig& config);

// Quantities available to the agent. Force is the filtered quasi-static
// estimate; no force sensor is read.
struct Observation {
  Vec kinematics;
  Vec estimated_force;
  Vec joint_velocity;
  double k = 0.0;
  double k_lim = 0.0;
  bool has_stiffness = true;
  // True goal-space state, used for rewards and hindsight relabeling.
  Vec achieved_goal;

  // Policy input features: kinematics, force, and (k, k_lim) / k_max when the
  // observation carries stiffness.
  Vec Features(double k_max) const;
};

struct Goal {
  Vec value;
};

// Normalized action in [-1, 1]^n: pose deltas first, then dk and dk_lim when
// has_stiffness.
struct StiffnessAction {
  Vec pose_delta;
  double dk = 0.0;
  double dk_lim = 0.0;
  bool has_stiffness = true;

  Vec Flatten() const;
  static StiffnessAction FromFlat(std::span<const double> values,
                                  int pose_dim, bool has_stiffness);
};

int PoseDim(EnvId id);
int ActionDim(const EnvConfig& config);
int GoalDim(EnvId id);

struct SuccessFlags {
  bool task = false;
  bool safety = false;
  bool overall = false;
};

// Full simulator state. Fields that an env does not use stay empty.
struct EnvState {
  EnvConfig config;  // after domain randomization
  Goal goal;

  Vec effector;           // BlockLite gripper centre (x, z)
  Vec effector_velocity;
  std::vector<ElasticJoint> joints;
  Vec object_pos;
  Vec object_vel;
  std::vector<ForceChannel> force_estimate;
  ForceChannel force_truth;
  std::vector<double> contact_normal;  // last substep, per contact

  double k = 0.0;
  double k_lim = 0.0;
  bool intact = true;
  bool done = false;
  int t = 0;

  Vec measurement_noise;  // current sample added to the measured object pose
  Vec last_action;        // last executed (post-failure) action
  bool control_failed = false;
  int control_failure_count = 0;
  int perturbation_count = 0;
  int noise_count = 0;
};

struct ResetResult {
  EnvState state;
  Observation observation;
  Goal goal;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  SuccessFlags flags;
  Vec executed_action;
  double ground_truth_force = 0.0;
};

// Samples a fresh episode. Domain randomization, when enabled, runs first.
ResetResult Reset(const EnvConfig& config, Rng& rng);

// Advances one control step. Throws InvalidInput if an action component
// leaves [-1, 1] or the dimension is wrong, or if the episode is over.
// A non-finite simulator state throws SimulationFault.
StepResult Step(EnvState& state, std::span<const double> action, Rng& rng);

bool KinematicGoalMet(std::span<const double> achieved, const Goal& goal,
                      const EnvConfig& config);

double ComputeReward(const Observation& obs, const Goal& goal,
                     const EnvConfig& config);

SuccessFlags IsSuccess(const Observation& obs, const Goal& goal,
                       const EnvState& state);

// Draws this step's measurement noise and object perturbation (applied to
// `state`) and decides control failure. Returns the action to execute: the
// previous executed action on a control failure, `action` otherwise.
Vec ApplyUncertainties(EnvState& state, std::span<const double> action,
                       Rng& rng);

// Per-reset parameter variation for FingersLite. On other envs it returns
// the config unchanged and sets *warning when non-null.
EnvConfig RandomizeDomain(EnvConfig config, Rng& rng, bool* warning = nullptr);

// Builds an observation of the current state (with the current noise sample).
Observation Observe(const EnvState& state);

// One JSON object per step: obs, action, reward, flags.
struct TraceStep {
  Observation observation;
  Vec action;
  double reward = 0.0;
  SuccessFlags flags;
};
void WriteTraceJsonl(std::ostream& out, const std::vector<TraceStep>& trace);

}  // namespace scape

#endif  // SCAPE_ENV_H_
