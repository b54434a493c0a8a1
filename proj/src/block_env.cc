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

// BlockLite. A kinematic gripper centre moves in the vertical (x, z) plane;
// two coupled series-elastic fingers open and close along x. The block rests on a
// table and is held by Coulomb friction from the finger contacts.

#include <array>
#include <cmath>

#include "env_internal.h"

namespace scape::internal {
namespace {

constexpr double kHalfWidth = 0.025;     // block half size, m
constexpr double kFingerReach = 0.02;    // finger pad half length, m
constexpr double kFingerOpen = 0.05;     // initial opening per finger, m
constexpr double kFingerTravel = 0.06;   // mechanical stop, m
constexpr double kRestHeight = kHalfWidth;
constexpr double kWorkspaceX = 0.25;
constexpr double kWorkspaceTop = 0.30;

constexpr int kLeft = 0;
constexpr int kRight = 1;

void Reset(EnvState& s, Rng& rng) {
  const EnvConfig& c = s.config;
  s.effector = {0.0, 0.12};
  s.effector_velocity = {0.0, 0.0};
  ElasticJoint finger;
  finger.position = kFingerOpen;
  finger.setpoint = kFingerOpen;
  finger.k_passive = c.k_passive;
  finger.k_max = c.k_max;
  finger.mass = c.actuator_mass;
  finger.damping = c.actuator_damping;
  finger.control_lo = c.control_lo;
  finger.control_hi = c.control_hi;
  finger.limit_lo = 0.0;
  finger.limit_hi = kFingerTravel;
  s.joints = {finger, finger};
  s.object_pos = {rng.Uniform(-0.15, 0.15), kRestHeight};
  s.object_vel = {0.0, 0.0};
  // The target is always in the air: at least 6 cm above the resting height.
  s.goal.value = {rng.Uniform(-0.15, 0.15),
                  kRestHeight + rng.Uniform(0.06, 0.20)};
  s.contact_normal = {0.0, 0.0};
}

void ApplyPose(EnvState& s, std::span<const double> pose) {
  const EnvConfig& c = s.config;
  const double tx =
      Clamp(s.effector[0] + c.move_scale * pose[0], -kWorkspaceX, kWorkspaceX);
  const double tz =
      Clamp(s.effector[1] + c.move_scale * pose[1], kRestHeight, kWorkspaceTop);
  s.effector_velocity = {(tx - s.effector[0]) / c.dt, (tz - s.effector[1]) / c.dt};
  const double grip = s.joints[kLeft].setpoint + c.grip_scale * pose[2];
  CommandSetpoint(s.joints[kLeft], grip);
  CommandSetpoint(s.joints[kRight], grip);
}

double Substep(EnvState& s, double h) {
  const EnvConfig& c = s.config;
  const double m = c.object_mass;
  s.effector[0] += h * s.effector_velocity[0];
  s.effector[1] += h * s.effector_velocity[1];
  const double gx = s.effector[0];
  const double gz = s.effector[1];
  const double gvx = s.effector_velocity[0];
  const double gvz = s.effector_velocity[1];
  ElasticJoint& left = s.joints[kLeft];
  ElasticJoint& right = s.joints[kRight];
  double& ox = s.object_pos[0];
  double& oz = s.object_pos[1];
  double& vx = s.object_vel[0];
  double& vz = s.object_vel[1];

  const double face_left = gx - left.position;
  const double face_right = gx + right.position;
  const bool aligned = std::abs(oz - gz) < kFingerReach + kHalfWidth &&
                       face_left < ox && ox < face_right;
  double normal_left = 0.0;
  double normal_right = 0.0;
  if (aligned) {
    const double pen_left = face_left - (ox - kHalfWidth);
    if (pen_left > 0.0) {
      const double rate = (gvx - left.velocity) - vx;
      normal_left = std::max(
          0.0, c.contact_stiffness * pen_left + c.contact_damping * rate);
    }
    const double pen_right = (ox + kHalfWidth) - face_right;
    if (pen_right > 0.0) {
      const double rate = vx - (gvx + right.velocity);
      normal_right = std::max(
          0.0, c.contact_stiffness * pen_right + c.contact_damping * rate);
    }
  }
  // The fingers are geared to one drive, so the opening stays symmetric and
  // a grasped block is centred by the contact springs.
  left = StepJoint(left, h, 0.5 * (normal_left + normal_right));
  right = left;

  // Object: normal forces along x, gravity along z, then friction impulses
  // projected onto the Coulomb cone (stick when the cone allows it).
  double vx_next = vx + h * (normal_left - normal_right) / m;
  double vz_next = vz - h * kGravity;
  const double grip_cap = c.friction * (normal_left + normal_right) * h;
  const double grip_impulse = Clamp(m * (gvz - vz_next), -grip_cap, grip_cap);
  vz_next += grip_impulse / m;
  const bool on_table = oz <= kRestHeight + 1e-9;
  double table_impulse = 0.0;
  if (on_table && vz_next < 0.0) {
    table_impulse = -m * vz_next;
    vz_next = 0.0;
  }
  if (on_table) {
    // Gripper friction along x is ignored; the table resists sliding.
    const double cap = c.friction * table_impulse;
    vx_next += Clamp(-m * vx_next, -cap, cap) / m;
  }
  vx = vx_next;
  vz = vz_next;
  ox += h * vx;
  oz += h * vz;
  if (oz < kRestHeight) {
    oz = kRestHeight;
    if (vz < 0.0) vz = 0.0;
  }
  s.contact_normal = {normal_left, normal_right};
  const double friction_force = grip_impulse / h;
  return std::sqrt(normal_left * normal_left + normal_right * normal_right +
                   friction_force * friction_force);
}

void Observe(const EnvState& s, Observation& obs) {
  const double mx = s.object_pos[0] + s.measurement_noise[0];
  const double mz = s.object_pos[1] + s.measurement_noise[1];
  const ElasticJoint& left = s.joints[kLeft];
  const ElasticJoint& right = s.joints[kRight];
  obs.kinematics = {s.effector[0],
                    s.effector[1],
                    mx,
                    mz,
                    mx - s.effector[0],
                    mz - s.effector[1],
                    left.position,
                    right.position,
                    left.velocity,
                    right.velocity,
                    s.effector_velocity[0],
                    s.effector_velocity[1],
                    s.object_vel[0],
                    s.object_vel[1],
                    left.setpoint};
  obs.estimated_force = {s.force_estimate[0].filtered,
                         s.force_estimate[1].filtered};
  obs.joint_velocity = {left.velocity, right.velocity};
  obs.achieved_goal = {s.object_pos[0], s.object_pos[1]};
}

bool Held(const EnvState& s) {
  return s.contact_normal.size() == 2 && s.contact_normal[0] > 0.0 &&
         s.contact_normal[1] > 0.0;
}

}  // namespace

const TaskHooks& BlockHooks() {
  static const TaskHooks hooks{&Reset, &ApplyPose, &Substep, &Observe, &Held};
  return hooks;
}

}  // namespace scape::internal
