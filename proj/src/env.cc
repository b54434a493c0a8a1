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

#include "scape/env.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "env_internal.h"

namespace scape {
namespace {

const internal::TaskHooks& Hooks(EnvId id) {
  switch (id) {
    case EnvId::kBlock:
      return internal::BlockHooks();
    case EnvId::kChip:
      return internal::ChipHooks();
    case EnvId::kFingers:
      return internal::FingersHooks();
  }
  throw InvalidInput("unknown environment id");
}

void CommandGraspStiffness(EnvState& state) {
  for (int j : internal::GraspJoints(state.config.env_id)) {
    ElasticJoint& joint = state.joints[j];
    joint.k = state.k;
    joint.k_lim = state.k_lim;
  }
}

}  // namespace

std::string_view EnvName(EnvId id) {
  switch (id) {
    case EnvId::kBlock:
      return "block";
    case EnvId::kChip:
      return "chip";
    case EnvId::kFingers:
      return "fingers";
  }
  return "unknown";
}

EnvId ParseEnvId(std::string_view name) {
  if (name == "block") return EnvId::kBlock;
  if (name == "chip") return EnvId::kChip;
  if (name == "fingers") return EnvId::kFingers;
  throw InvalidInput("unknown environment '" + std::string(name) + "'");
}

EnvConfig DefaultConfig(EnvId id) {
  EnvConfig c;
  c.env_id = id;
  switch (id) {
    case EnvId::kBlock:
      c.alpha = 2e-3;
      c.beta = 0.0;
      c.d = 0.05;
      c.fragility = 300.0;
      c.k_passive = 250.0;
      c.k_max = 250.0;
      c.horizon = 50;
      c.actuator_mass = 0.4;
      c.actuator_damping = 20.0;
      c.control_lo = -1.0;
      c.control_hi = 1.0;
      c.grip_scale = 0.25;
      c.move_scale = 0.05;
      c.object_mass = 0.5;
      c.friction = 1.0;
      c.contact_stiffness = 15000.0;
      c.contact_damping = 20.0;
      c.uncertainty.noise_amplitude = 0.01;
      c.uncertainty.perturbation_amplitude = 0.5;
      break;
    case EnvId::kChip:
      c.alpha = 2e-2;
      c.beta = 0.0;
      c.d = 0.05;
      c.velocity_threshold = 0.02;
      c.fragility = 200.0;
      c.k_passive = 50.0;  // wrist, Nm/rad
      c.k_max = 50.0;
      c.horizon = 50;
      c.actuator_mass = 0.01;  // wrist inertia, kg m^2
      c.actuator_damping = 1.0;
      c.control_lo = -1.0;
      c.control_hi = 1.0;
      c.grip_scale = 0.5;
      c.move_scale = 0.02;
      c.aux_stiffness = 2000.0;  // forearm x1, x2
      c.aux_mass = 0.4;
      c.aux_damping = 40.0;
      c.object_mass = 0.1;
      c.friction = 1.0;
      c.wall_friction = 1.0;
      c.wall_friction_scale = 0.3;
      c.contact_stiffness = 40000.0;
      c.contact_damping = 10.0;
      c.uncertainty.noise_amplitude = 0.01;
      c.uncertainty.perturbation_amplitude = 0.5;
      break;
    case EnvId::kFingers:
      c.alpha = 4e-1;
      c.beta = 1.0;
      c.d = std::numbers::pi / 16.0;
      c.fragility = 2.0;
      c.k_passive = 200.0;  // radial, N/m
      c.k_max = 200.0;
      c.horizon = 100;
      c.actuator_mass = 0.05;
      c.actuator_damping = 4.0;
      c.control_lo = 0.0;
      c.control_hi = 0.04;
      c.grip_scale = 0.01;
      c.move_scale = 0.1;
      c.aux_stiffness = 0.3;  // tangential, Nm/rad
      c.aux_mass = 1e-4;
      c.aux_damping = 0.01;
      c.object_mass = 5e-5;  // rotational inertia, kg m^2
      c.friction = 1.0;
      c.contact_stiffness = 2000.0;
      c.contact_damping = 2.0;
      c.band_stiffness = 50.0;
      c.object_width = 0.020;
      c.object_offset = 0.0;
      c.velocity_bound = 10.0;
      c.uncertainty.noise_amplitude = 0.02;
      c.uncertainty.perturbation_amplitude = 0.5;
      break;
  }
  return c;
}

void ValidateConfig(const EnvConfig& c) {
  if (!(c.alpha >= 0.0) || !(c.beta >= 0.0)) {
    throw InvalidInput("alpha and beta must be >= 0");
  }
  if (!(c.d > 0.0)) throw InvalidInput("success threshold d must be > 0");
  if (c.horizon <= 0) throw InvalidInput("horizon must be > 0");
  if (!(c.fragility > 0.0)) throw InvalidInput("fragility must be > 0");
  if (!(c.k_passive > 0.0) || !(c.k_max >= c.k_passive)) {
    throw InvalidInput("need 0 < k_passive <= k_max");
  }
  if (!(c.k_floor_ratio > 0.0 && c.k_floor_ratio <= 1.0)) {
    throw InvalidInput("k_floor_ratio must lie in (0, 1]");
  }
  if (!(c.dt > 0.0) || c.substeps <= 0 || !(c.force_tau > 0.0)) {
    throw InvalidInput("dt, substeps and force_tau must be positive");
  }
  if (!(c.control_lo < c.control_hi)) throw InvalidInput("empty control range");
  const auto& u = c.uncertainty;
  if (!(u.control_failure_prob >= 0.0 && u.control_failure_prob <= 1.0)) {
    throw InvalidInput("control failure probability must lie in [0, 1]");
  }
}

namespace {

// Keys mirror the environment tables; each maps to one EnvConfig field.
struct DoubleKey {
  const char* name;
  double EnvConfig::*field;
};

constexpr DoubleKey kDoubleKeys[] = {
    {"alpha", &EnvConfig::alpha},
    {"beta", &EnvConfig::beta},
    {"d", &EnvConfig::d},
    {"velocity_threshold", &EnvConfig::velocity_threshold},
    {"fragility", &EnvConfig::fragility},
    {"k_passive", &EnvConfig::k_passive},
    {"k_max", &EnvConfig::k_max},
    {"k_floor_ratio", &EnvConfig::k_floor_ratio},
    {"stiffness_rate", &EnvConfig::stiffness_rate},
    {"dt", &EnvConfig::dt},
    {"force_tau", &EnvConfig::force_tau},
    {"actuator_mass", &EnvConfig::actuator_mass},
    {"actuator_damping", &EnvConfig::actuator_damping},
    {"control_lo", &EnvConfig::control_lo},
    {"control_hi", &EnvConfig::control_hi},
    {"grip_scale", &EnvConfig::grip_scale},
    {"move_scale", &EnvConfig::move_scale},
    {"aux_stiffness", &EnvConfig::aux_stiffness},
    {"aux_mass", &EnvConfig::aux_mass},
    {"aux_damping", &EnvConfig::aux_damping},
    {"object_mass", &EnvConfig::object_mass},
    {"friction", &EnvConfig::friction},
    {"wall_friction", &EnvConfig::wall_friction},
    {"wall_friction_scale", &EnvConfig::wall_friction_scale},
    {"contact_stiffness", &EnvConfig::contact_stiffness},
    {"contact_damping", &EnvConfig::contact_damping},
    {"band_stiffness", &EnvConfig::band_stiffness},
    {"object_width", &EnvConfig::object_width},
    {"object_offset", &EnvConfig::object_offset},
    {"velocity_bound", &EnvConfig::velocity_bound},
};

std::string Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

double ParseDouble(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) {
    throw InvalidInput("config key '" + key + "' expects a number, got '" +
                       value + "'");
  }
  return v;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw InvalidInput("config key '" + key + "' expects a boolean");
}

}  // namespace

EnvConfig ParseConfig(std::string_view text, EnvConfig base) {
  EnvConfig c = std::move(base);
  std::istringstream lines{std::string(text)};
  std::string line;
  int line_no = 0;
  bool seen_other = false;
  while (std::getline(lines, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("config line " + std::to_string(line_no) +
                         " is not 'key = value'");
    }
    const std::string key = Trim(std::string_view(trimmed).substr(0, eq));
    const std::string value = Trim(std::string_view(trimmed).substr(eq + 1));
    if (key == "env") {
      if (seen_other) throw InvalidInput("'env' must be the first config key");
      c = DefaultConfig(ParseEnvId(value));
      continue;
    }
    seen_other = true;
    bool matched = false;
    for (const DoubleKey& k : kDoubleKeys) {
      if (key == k.name) {
        c.*(k.field) = ParseDouble(key, value);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (key == "horizon") {
      c.horizon = static_cast<int>(ParseDouble(key, value));
    } else if (key == "substeps") {
      c.substeps = static_cast<int>(ParseDouble(key, value));
    } else if (key == "action_mode") {
      if (value == "stiffness") {
        c.action_mode = ActionMode::kStiffness;
      } else if (value == "position") {
        c.action_mode = ActionMode::kPosition;
      } else {
        throw InvalidInput("action_mode must be stiffness or position");
      }
    } else if (key == "terminate_on_break") {
      c.terminate_on_break = ParseBool(key, value);
    } else if (key == "safety_reward") {
      c.safety_reward = ParseBool(key, value);
    } else if (key == "measurement_noise") {
      c.uncertainty.measurement_noise = ParseBool(key, value);
    } else if (key == "perturbation") {
      c.uncertainty.perturbation = ParseBool(key, value);
    } else if (key == "control_failure") {
      c.uncertainty.control_failure = ParseBool(key, value);
    } else if (key == "noise_amplitude") {
      c.uncertainty.noise_amplitude = ParseDouble(key, value);
    } else if (key == "perturbation_amplitude") {
      c.uncertainty.perturbation_amplitude = ParseDouble(key, value);
    } else if (key == "control_failure_prob") {
      c.uncertainty.control_failure_prob = ParseDouble(key, value);
    } else if (key == "domain_randomization") {
      c.randomization.enabled = ParseBool(key, value);
    } else if (key == "band_stiffness_lo") {
      c.randomization.band_stiffness_lo = ParseDouble(key, value);
    } else if (key == "band_stiffness_hi") {
      c.randomization.band_stiffness_hi = ParseDouble(key, value);
    } else if (key == "width_lo") {
      c.randomization.width_lo = ParseDouble(key, value);
    } else if (key == "width_hi") {
      c.randomization.width_hi = ParseDouble(key, value);
    } else if (key == "offset_lo") {
      c.randomization.offset_lo = ParseDouble(key, value);
    } else if (key == "offset_hi") {
      c.randomization.offset_hi = ParseDouble(key, value);
    } else {
      throw InvalidInput("unknown config key '" + key + "'");
    }
  }
  ValidateConfig(c);
  return c;
}

EnvConfig LoadConfigFile(const std::string& path, EnvConfig base) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str(), std::move(base));
}

std::string FormatConfig(const EnvConfig& c) {
  std::ostringstream out;
  out.precision(17);
  auto flag = [](bool b) { return b ? "true" : "false"; };
  out << "env = " << EnvName(c.env_id) << "\n";
  out << "action_mode = "
      << (c.action_mode == ActionMode::kStiffness ? "stiffness" : "position")
      << "\n";
  for (const DoubleKey& k : kDoubleKeys) {
    out << k.name << " = " << c.*(k.field) << "\n";
  }
  out << "horizon = " << c.horizon << "\n";
  out << "substeps = " << c.substeps << "\n";
  out << "terminate_on_break = " << flag(c.terminate_on_break) << "\n";
  out << "safety_reward = " << flag(c.safety_reward) << "\n";
  const auto& u = c.uncertainty;
  out << "measurement_noise = " << flag(u.measurement_noise) << "\n";
  out << "perturbation = " << flag(u.perturbation) << "\n";
  out << "control_failure = " << flag(u.control_failure) << "\n";
  out << "noise_amplitude = " << u.noise_amplitude << "\n";
  out << "perturbation_amplitude = " << u.perturbation_amplitude << "\n";
  out << "control_failure_prob = " << u.control_failure_prob << "\n";
  const auto& r = c.randomization;
  out << "domain_randomization = " << flag(r.enabled) << "\n";
  out << "band_stiffness_lo = " << r.band_stiffness_lo << "\n";
  out << "band_stiffness_hi = " << r.band_stiffness_hi << "\n";
  out << "width_lo = " << r.width_lo << "\n";
  out << "width_hi = " << r.width_hi << "\n";
  out << "offset_lo = " << r.offset_lo << "\n";
  out << "offset_hi = " << r.offset_hi << "\n";
  return out.str();
}

double ForceBound(const EnvConfig& c) {
  const int channels = static_cast<int>(internal::GraspJoints(c.env_id).size());
  const double deflection = c.control_hi - c.control_lo;
  return std::sqrt(static_cast<double>(channels)) * c.k_max * deflection;
}

Vec Observation::Features(double k_max) const {
  Vec f;
  f.reserve(kinematics.size() + estimated_force.size() + 2);
  f.insert(f.end(), kinematics.begin(), kinematics.end());
  f.insert(f.end(), estimated_force.begin(), estimated_force.end());
  if (has_stiffness) {
    f.push_back(k / k_max);
    f.push_back(k_lim / k_max);
  }
  return f;
}

Vec StiffnessAction::Flatten() const {
  Vec v = pose_delta;
  if (has_stiffness) {
    v.push_back(dk);
    v.push_back(dk_lim);
  }
  return v;
}

StiffnessAction StiffnessAction::FromFlat(std::span<const double> values,
                                          int pose_dim, bool has_stiffness) {
  const std::size_t expected = pose_dim + (has_stiffness ? 2 : 0);
  if (values.size() != expected) {
    throw InvalidInput("action has " + std::to_string(values.size()) +
                       " components, expected " + std::to_string(expected));
  }
  StiffnessAction a;
  a.pose_delta.assign(values.begin(), values.begin() + pose_dim);
  a.has_stiffness = has_stiffness;
  if (has_stiffness) {
    a.dk = values[pose_dim];
    a.dk_lim = values[pose_dim + 1];
  }
  return a;
}

int PoseDim(EnvId id) {
  switch (id) {
    case EnvId::kBlock:
      return 3;  // dx, dz, grip
    case EnvId::kChip:
      return 3;  // dx1, dx2, wrist pitch
    case EnvId::kFingers:
      return 4;  // (dr, dphi) per finger
  }
  return 0;
}

int ActionDim(const EnvConfig& config) {
  return PoseDim(config.env_id) +
         (config.action_mode == ActionMode::kStiffness ? 2 : 0);
}

int GoalDim(EnvId id) {
  switch (id) {
    case EnvId::kBlock:
      return 2;
    case EnvId::kChip:
      return 4;  // position and velocity on the wall
    case EnvId::kFingers:
      return 1;
  }
  return 0;
}

bool KinematicGoalMet(std::span<const double> achieved, const Goal& goal,
                      const EnvConfig& config) {
  if (achieved.size() != goal.value.size()) {
    throw InvalidInput("achieved goal and goal differ in dimension");
  }
  if (config.env_id == EnvId::kChip) {
    const double dx = achieved[0] - goal.value[0];
    const double dz = achieved[1] - goal.value[1];
    const double dvx = achieved[2] - goal.value[2];
    const double dvz = achieved[3] - goal.value[3];
    return std::hypot(dx, dz) < config.d &&
           std::hypot(dvx, dvz) < config.velocity_threshold;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < achieved.size(); ++i) {
    const double e = achieved[i] - goal.value[i];
    sum += e * e;
  }
  return std::sqrt(sum) < config.d;
}

double ComputeReward(const Observation& obs, const Goal& goal,
                     const EnvConfig& config) {
  const double r_task =
      KinematicGoalMet(obs.achieved_goal, goal, config) ? 0.0 : -1.0;
  if (!config.safety_reward) return r_task;
  return r_task - config.alpha * Norm(obs.estimated_force) -
         config.beta * Norm(obs.joint_velocity);
}

SuccessFlags IsSuccess(const Observation& obs, const Goal& goal,
                       const EnvState& state) {
  SuccessFlags flags;
  flags.task = KinematicGoalMet(obs.achieved_goal, goal, state.config);
  flags.safety = state.intact;
  flags.overall = flags.task && flags.safety;
  return flags;
}

Vec ApplyUncertainties(EnvState& state, std::span<const double> action,
                       Rng& rng) {
  const UncertaintyConfig& u = state.config.uncertainty;
  const EnvId id = state.config.env_id;
  if (u.measurement_noise) {
    state.measurement_noise.assign(internal::NoiseDim(id), 0.0);
    for (double& n : state.measurement_noise) {
      n = rng.Uniform(-u.noise_amplitude, u.noise_amplitude);
    }
    ++state.noise_count;
  }
  if (u.perturbation && Hooks(id).held(state)) {
    const double v = rng.Uniform(-u.perturbation_amplitude,
                                 u.perturbation_amplitude);
    // A velocity kick on the first object coordinate (x for block and chip,
    // theta for fingers). Unresisted, it displaces the object by v * dt over
    // the step; a firm grasp absorbs it through the contacts.
    state.object_vel[0] += v;
    ++state.perturbation_count;
  }
  state.control_failed = false;
  Vec executed(action.begin(), action.end());
  if (u.control_failure && rng.Bernoulli(u.control_failure_prob)) {
    if (state.last_action.size() == action.size()) {
      executed = state.last_action;
    } else {
      executed.assign(action.size(), 0.0);
    }
    state.control_failed = true;
    ++state.control_failure_count;
  }
  return executed;
}

EnvConfig RandomizeDomain(EnvConfig config, Rng& rng, bool* warning) {
  if (config.env_id != EnvId::kFingers) {
    if (warning != nullptr) *warning = true;
    return config;
  }
  if (warning != nullptr) *warning = false;
  const RandomizationConfig& r = config.randomization;
  config.band_stiffness = rng.Uniform(r.band_stiffness_lo, r.band_stiffness_hi);
  config.object_width = rng.Uniform(r.width_lo, r.width_hi);
  config.object_offset = rng.Uniform(r.offset_lo, r.offset_hi);
  return config;
}

Observation Observe(const EnvState& state) {
  Observation obs;
  Hooks(state.config.env_id).observe(state, obs);
  obs.k = state.k;
  obs.k_lim = state.k_lim;
  obs.has_stiffness = state.config.action_mode == ActionMode::kStiffness;
  return obs;
}

ResetResult Reset(const EnvConfig& config, Rng& rng) {
  ValidateConfig(config);
  ResetResult result;
  EnvState& state = result.state;
  state.config = config;
  if (config.randomization.enabled && config.env_id == EnvId::kFingers) {
    state.config = RandomizeDomain(config, rng);
  }
  Hooks(config.env_id).reset(state, rng);
  state.k = config.k_passive;
  state.k_lim = config.action_mode == ActionMode::kStiffness ? config.k_max
                                                             : config.k_passive;
  CommandGraspStiffness(state);
  const int channels = static_cast<int>(internal::GraspJoints(config.env_id).size());
  state.force_estimate.assign(channels, ForceChannel{0.0, 0.0, config.force_tau});
  state.force_truth = ForceChannel{0.0, 0.0, config.force_tau};
  state.measurement_noise.assign(internal::NoiseDim(config.env_id), 0.0);
  if (config.uncertainty.measurement_noise) {
    for (double& n : state.measurement_noise) {
      n = rng.Uniform(-config.uncertainty.noise_amplitude,
                      config.uncertainty.noise_amplitude);
    }
  }
  result.goal = state.goal;
  result.observation = Observe(state);
  return result;
}

StepResult Step(EnvState& state, std::span<const double> action, Rng& rng) {
  const EnvConfig& config = state.config;
  if (state.done) throw InvalidInput("step called on a finished episode");
  const int dim = ActionDim(config);
  if (static_cast<int>(action.size()) != dim) {
    throw InvalidInput("action has " + std::to_string(action.size()) +
                       " components, expected " + std::to_string(dim));
  }
  for (double a : action) {
    if (!(a >= -1.0 && a <= 1.0)) {
      throw InvalidInput("action component outside [-1, 1]; squash first");
    }
  }

  StepResult result;
  result.executed_action = ApplyUncertainties(state, action, rng);
  state.last_action = result.executed_action;
  const Vec& exec = result.executed_action;
  const int pose_dim = PoseDim(config.env_id);

  if (config.action_mode == ActionMode::kStiffness) {
    const double rate = config.stiffness_rate * config.k_max;
    const double floor = config.k_floor();
    state.k_lim = Clamp(state.k_lim + rate * exec[pose_dim + 1], floor,
                        config.k_max);
    state.k = Clamp(state.k + rate * exec[pose_dim], floor, state.k_lim);
  }
  CommandGraspStiffness(state);

  const internal::TaskHooks& hooks = Hooks(config.env_id);
  hooks.apply_pose(state, std::span<const double>(exec).first(pose_dim));

  const double h = config.dt / config.substeps;
  const auto grasp = internal::GraspJoints(config.env_id);
  for (int s = 0; s < config.substeps; ++s) {
    const double truth = hooks.substep(state, h);
    for (std::size_t c = 0; c < grasp.size(); ++c) {
      state.force_estimate[c] = LowPass(
          state.force_estimate[c], QuasiStaticForce(state.joints[grasp[c]]), h);
    }
    state.force_truth = LowPass(state.force_truth, truth, h);
    if (!std::isfinite(state.force_truth.filtered)) {
      throw SimulationFault("ground-truth force became non-finite");
    }
    state.intact = UpdateIntact(state.intact, state.force_truth.filtered,
                                config.fragility);
  }
  state.t += 1;

  result.observation = Observe(state);
  result.reward = ComputeReward(result.observation, state.goal, config);
  result.flags = IsSuccess(result.observation, state.goal, state);
  result.ground_truth_force = state.force_truth.filtered;
  state.done = state.t >= config.horizon ||
               (!state.intact && config.terminate_on_break);
  result.done = state.done;
  return result;
}

void WriteTraceJsonl(std::ostream& out, const std::vector<TraceStep>& trace) {
  for (const TraceStep& step : trace) {
    nlohmann::json line;
    line["obs"] = {
        {"kinematics", step.observation.kinematics},
        {"estimated_force", step.observation.estimated_force},
        {"joint_velocity", step.observation.joint_velocity},
        {"k", step.observation.k},
        {"k_lim", step.observation.k_lim},
        {"achieved_goal", step.observation.achieved_goal},
    };
    line["action"] = step.action;
    line["reward"] = step.reward;
    line["flags"] = {{"task", step.flags.task},
                     {"safety", step.flags.safety},
                     {"overall", step.flags.overall}};
    out << line.dump() << "\n";
  }
}

}  // namespace scape
