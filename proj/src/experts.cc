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

// Scripted position-control experts. Each one commands the grasp actuator to
// its full-close limit, as a position-controlled gripper would, and so
// routinely exceeds the object's fragility.

#include <numbers>

#include "scape/demos.h"

namespace scape {
namespace {

constexpr double kAlign = 0.004;
constexpr double kHover = 0.06;

double Toward(double target, double current, double scale, double gain = 1.0) {
  return Clamp(gain * (target - current) / scale, -1.0, 1.0);
}

Vec BlockExpert(const EnvState& s) {
  const EnvConfig& c = s.config;
  const double gx = s.effector[0], gz = s.effector[1];
  const double ox = s.object_pos[0], oz = s.object_pos[1];
  const ElasticJoint& finger = s.joints[0];
  const bool closing = finger.setpoint < 0.0;
  Vec a(3, 0.0);
  if (closing) {
    a[2] = -1.0;
    const bool held = s.contact_normal[0] > 0.0 && s.contact_normal[1] > 0.0;
    if (held && finger.setpoint <= 0.5 * c.control_lo) {
      a[0] = Toward(gx + s.goal.value[0] - ox, gx, c.move_scale, 0.5);
      a[1] = Toward(gz + s.goal.value[1] - oz, gz, c.move_scale, 0.5);
    }
    return a;
  }
  if (std::abs(ox - gx) > kAlign) {
    a[0] = Toward(ox, gx, c.move_scale);
    a[1] = Toward(std::max(gz, oz + kHover), gz, c.move_scale);
  } else if (std::abs(oz - gz) > kAlign) {
    a[0] = Toward(ox, gx, c.move_scale);
    a[1] = Toward(oz, gz, c.move_scale);
  } else {
    a[2] = -1.0;
  }
  return a;
}

Vec ChipExpert(const EnvState& s) {
  const EnvConfig& c = s.config;
  const ElasticJoint& wrist = s.joints[0];
  const ElasticJoint& x1 = s.joints[1];
  const ElasticJoint& x2 = s.joints[2];
  const double cx = s.object_pos[0], cz = s.object_pos[1];
  Vec a(3, 0.0);
  if (wrist.setpoint <= 0.0) {
    const bool over = std::abs(x1.position - cx) < kAlign &&
                      std::abs(x2.position - cz) < kAlign;
    if (over) {
      a[2] = 1.0;
    } else {
      a[0] = Toward(cx, x1.setpoint, c.move_scale);
      a[1] = Toward(cz, x2.setpoint, c.move_scale);
    }
    return a;
  }
  a[2] = 1.0;
  const bool pressed = s.contact_normal[0] > 0.0 &&
                       wrist.setpoint >= c.control_hi - 1e-9;
  if (pressed) {
    // Integral action on the chip position; the arm lags its setpoint while
    // dragging against wall friction.
    a[0] = Toward(s.goal.value[0], cx, c.move_scale, 0.5);
    a[1] = Toward(s.goal.value[1], cz, c.move_scale, 0.5);
  }
  return a;
}

Vec FingersExpert(const EnvState& s) {
  const EnvConfig& c = s.config;
  Vec a = {-1.0, 0.0, -1.0, 0.0};
  const bool held = s.contact_normal[0] > 0.0 && s.contact_normal[1] > 0.0;
  const bool closed = s.joints[0].setpoint <= c.control_lo + 1e-9 &&
                      s.joints[2].setpoint <= c.control_lo + 1e-9;
  if (held && closed) {
    const double turn =
        Toward(s.goal.value[0], s.object_pos[0], c.move_scale, 0.5);
    a[1] = turn;
    a[3] = turn;
  }
  return a;
}

}  // namespace

Vec ExpertAction(const EnvState& state) {
  switch (state.config.env_id) {
    case EnvId::kBlock:
      return BlockExpert(state);
    case EnvId::kChip:
      return ChipExpert(state);
    case EnvId::kFingers:
      return FingersExpert(state);
  }
  return {};
}

}  // namespace scape
