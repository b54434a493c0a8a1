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

// ChipLite. A forearm moves the wrist in the plane of a vertical wall
// (x1 horizontal, x2 vertical). The compliant wrist pitch swings a finger
// toward the wall; pressing traps a thin chip, which the finger then drags up
// the wall. Friction at the wall is ground-truth force the wrist torque
// estimate never sees.

#include <algorithm>
#include <cmath>
#include <utility>

#include "env_internal.h"

namespace scape::internal {
namespace {

constexpr double kStandoff = 0.06;    // wrist to wall distance, m
constexpr double kFingerLength = 0.1;
constexpr double kThickness = 0.005;  // chip thickness, m
constexpr double kChipHalf = 0.015;   // in-plane half size, m
constexpr double kFloor = kChipHalf;  // chip centre height at rest on floor
constexpr double kSlipTolerance = 1e-6;

constexpr int kWrist = 0;
constexpr int kArmX1 = 1;
constexpr int kArmX2 = 2;

void Reset(EnvState& s, Rng& rng) {
  const EnvConfig& c = s.config;
  ElasticJoint wrist;
  wrist.k_passive = c.k_passive;
  wrist.k_max = c.k_max;
  wrist.mass = c.actuator_mass;
  wrist.damping = c.actuator_damping;
  wrist.control_lo = c.control_lo;
  wrist.control_hi = c.control_hi;
  wrist.limit_lo = -1.2;
  wrist.limit_hi = 1.2;
  ElasticJoint arm;
  arm.k = c.aux_stiffness;
  arm.k_lim = c.aux_stiffness;
  arm.k_passive = c.aux_stiffness;
  arm.k_max = c.aux_stiffness;
  arm.mass = c.aux_mass;
  arm.damping = c.aux_damping;
  arm.control_lo = 0.0;
  arm.control_hi = 0.2;
  arm.limit_lo = 0.0;
  arm.limit_hi = 0.2;
  ElasticJoint x1 = arm;
  ElasticJoint x2 = arm;
  x1.position = x1.setpoint = 0.1;
  x2.position = x2.setpoint = 0.06;
  s.joints = {wrist, x1, x2};
  const double chip_x = rng.Uniform(0.06, 0.14);
  s.object_pos = {chip_x, kFloor};
  s.object_vel = {0.0, 0.0};
  s.goal.value = {Clamp(chip_x + rng.Uniform(-0.02, 0.02), 0.03, 0.17),
                  rng.Uniform(0.09, 0.17), 0.0, 0.0};
  s.contact_normal = {0.0};
}

void ApplyPose(EnvState& s, std::span<const double> pose) {
  const EnvConfig& c = s.config;
  CommandSetpoint(s.joints[kArmX1], s.joints[kArmX1].setpoint + c.move_scale * pose[0]);
  CommandSetpoint(s.joints[kArmX2], s.joints[kArmX2].setpoint + c.move_scale * pose[1]);
  CommandSetpoint(s.joints[kWrist], s.joints[kWrist].setpoint + c.grip_scale * pose[2]);
}

// Unit vector of v, or zero when |v| is negligible.
void Direction(double vx, double vz, double& ux, double& uz) {
  const double n = std::hypot(vx, vz);
  if (n < kSlipTolerance) {
    ux = uz = 0.0;
  } else {
    ux = vx / n;
    uz = vz / n;
  }
}

double Substep(EnvState& s, double h) {
  const EnvConfig& c = s.config;
  const double m = c.object_mass;
  ElasticJoint& wrist = s.joints[kWrist];
  ElasticJoint& x1 = s.joints[kArmX1];
  ElasticJoint& x2 = s.joints[kArmX2];
  double& cx = s.object_pos[0];
  double& cz = s.object_pos[1];
  double& vx = s.object_vel[0];
  double& vz = s.object_vel[1];

  const bool overlap = std::abs(x1.position - cx) < kChipHalf &&
                       std::abs(x2.position - cz) < kChipHalf;
  const double gap = kStandoff - kFingerLength * std::sin(wrist.position);
  const double pen = kThickness - gap;
  double normal = 0.0;
  if (overlap && pen > 0.0) {
    const double rate = kFingerLength * std::cos(wrist.position) * wrist.velocity;
    normal = std::max(0.0, c.contact_stiffness * pen + c.contact_damping * rate);
  }

  // Chip in-plane motion. First try the chip riding on the fingertip: arm
  // and chip move as one body against wall friction, solved implicitly so the
  // friction cannot reverse the motion. If that needs more finger friction
  // than the cone allows, the chip slides under kinetic finger friction.
  const double big_m = x1.mass;  // both forearm axes share the same mass
  // Finger and wall share the same tabulated coefficient, which would pin the
  // chip for good; the wall acts with a reduced effective coefficient.
  const double mu_wall = c.wall_friction * c.wall_friction_scale;
  double finger_fx = 0.0, finger_fz = 0.0;
  double wall_fx = 0.0, wall_fz = 0.0;
  double nvx = vx, nvz = vz - h * kGravity;
  // Solves one body of mass `mass`, velocity (ux, uz) after all non-wall
  // impulses, pressed on the wall with `normal`. Returns the wall force.
  auto wall = [&](double mass, double ux, double uz, double& out_x,
                  double& out_z) {
    const double speed = std::hypot(ux, uz);
    if (mass * speed <= mu_wall * normal * h) {
      out_x = out_z = 0.0;
      return std::pair{-mass * ux / h, -mass * uz / h};
    }
    const double scale = 1.0 - mu_wall * normal * h / (mass * speed);
    out_x = ux * scale;
    out_z = uz * scale;
    return std::pair{mass * (out_x - ux) / h, mass * (out_z - uz) / h};
  };
  if (normal > 0.0) {
    const double spring_x =
        QuasiStaticForce(x1) - x1.damping * x1.velocity;
    const double spring_z =
        QuasiStaticForce(x2) - x2.damping * x2.velocity;
    const double total = big_m + m;
    const double ux =
        (big_m * x1.velocity + m * vx + h * spring_x) / total;
    const double uz =
        (big_m * x2.velocity + m * vz + h * (spring_z - m * kGravity)) / total;
    double sx, sz;
    const auto [fx, fz] = wall(total, ux, uz, sx, sz);
    // Finger force needed to give the chip the common velocity.
    const double jx = m * (sx - vx) / h - fx;
    const double jz = m * (sz - vz) / h - fz + m * kGravity;
    if (std::hypot(jx, jz) <= c.friction * normal) {
      nvx = sx;
      nvz = sz;
      finger_fx = jx;
      finger_fz = jz;
      wall_fx = fx;
      wall_fz = fz;
    } else {
      double rx, rz;
      Direction(x1.velocity - vx, x2.velocity - vz, rx, rz);
      finger_fx = c.friction * normal * rx;
      finger_fz = c.friction * normal * rz;
      const double qx = vx + h * finger_fx / m;
      const double qz = vz + h * (finger_fz / m - kGravity);
      const auto [gx, gz] = wall(m, qx, qz, nvx, nvz);
      wall_fx = gx;
      wall_fz = gz;
    }
  }
  vx = nvx;
  vz = nvz;
  cx += h * vx;
  cz += h * vz;
  if (cz <= kFloor) {
    cz = kFloor;
    if (vz < 0.0) vz = 0.0;
    if (normal == 0.0) vx = 0.0;  // resting on the floor ledge
  }

  const double lever = kFingerLength * std::cos(wrist.position);
  wrist = StepJoint(wrist, h, -normal * lever);
  x1 = StepJoint(x1, h, -finger_fx);
  x2 = StepJoint(x2, h, -finger_fz);

  s.contact_normal = {normal};
  return std::sqrt(normal * normal + finger_fx * finger_fx +
                   finger_fz * finger_fz + wall_fx * wall_fx +
                   wall_fz * wall_fz);
}

void Observe(const EnvState& s, Observation& obs) {
  const ElasticJoint& wrist = s.joints[kWrist];
  const ElasticJoint& x1 = s.joints[kArmX1];
  const ElasticJoint& x2 = s.joints[kArmX2];
  const double mx = s.object_pos[0] + s.measurement_noise[0];
  const double mz = s.object_pos[1] + s.measurement_noise[1];
  obs.kinematics = {x1.position,     x2.position,    x1.velocity,
                    x2.velocity,     wrist.position, wrist.velocity,
                    mx,              mz,             mx - x1.position,
                    mz - x2.position, s.object_vel[0], s.object_vel[1],
                    wrist.setpoint,  x1.setpoint,    x2.setpoint};
  obs.estimated_force = {s.force_estimate[0].filtered};
  obs.joint_velocity = {wrist.velocity, x1.velocity, x2.velocity};
  obs.achieved_goal = {s.object_pos[0], s.object_pos[1], s.object_vel[0],
                       s.object_vel[1]};
}

bool Held(const EnvState& s) {
  return !s.contact_normal.empty() && s.contact_normal[0] > 0.0;
}

}  // namespace

const TaskHooks& ChipHooks() {
  static const TaskHooks hooks{&Reset, &ApplyPose, &Substep, &Observe, &Held};
  return hooks;
}

}  // namespace scape::internal
