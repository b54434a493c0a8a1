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

#ifndef SCAPE_SRC_JSON_IO_H_
#define SCAPE_SRC_JSON_IO_H_

#include <nlohmann/json.hpp>

#include "scape/env.h"

namespace scape::internal {

inline nlohmann::json ToJson(const Observation& obs) {
  return {{"kinematics", obs.kinematics},
          {"estimated_force", obs.estimated_force},
          {"joint_velocity", obs.joint_velocity},
          {"k", obs.k},
          {"k_lim", obs.k_lim},
          {"has_stiffness", obs.has_stiffness},
          {"achieved_goal", obs.achieved_goal}};
}

inline Observation ObservationFromJson(const nlohmann::json& j) {
  Observation obs;
  obs.kinematics = j.at("kinematics").get<Vec>();
  obs.estimated_force = j.at("estimated_force").get<Vec>();
  obs.joint_velocity = j.at("joint_velocity").get<Vec>();
  obs.k = j.at("k").get<double>();
  obs.k_lim = j.at("k_lim").get<double>();
  obs.has_stiffness = j.at("has_stiffness").get<bool>();
  obs.achieved_goal = j.at("achieved_goal").get<Vec>();
  return obs;
}

inline nlohmann::json ToJson(const SuccessFlags& f) {
  return {{"task", f.task}, {"safety", f.safety}, {"overall", f.overall}};
}

inline SuccessFlags FlagsFromJson(const nlohmann::json& j) {
  SuccessFlags f;
  f.task = j.at("task").get<bool>();
  f.safety = j.at("safety").get<bool>();
  f.overall = j.at("overall").get<bool>();
  return f;
}

}  // namespace scape::internal

#endif  // SCAPE_SRC_JSON_IO_H_
