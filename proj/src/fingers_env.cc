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

// FingersLite. Two fingertips in polar coordinates (r, phi) about a pivot
// squeeze a rectangular block from opposite sides. The block turns about its
// centre against elastic bands; friction at the pads makes it follow the
// fingers' tangential motion. Stiffness is modulated radially.

#include <cmath>
#include <numbers>

#include "env_internal.h"

namespace scape::internal {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBlockLength = 0.04;  // perpendicular to the grasp, m
constexpr double kBandLever = 0.01;    // band attachment radius, m
constexpr double kBlockDamping = 0.002;
constexpr double kPadViscosity = 50.0;  // regularized stick, Ns/m
constexpr double kOpenGap = 0.006;
constexpr double kTangentialRange = 1.0;

// Joint layout: (r, phi) for finger 0, then (r, phi) for finger 1.
constexpr int kR0 = 0;
constexpr int kPhi0 = 1;
constexpr int kR1 = 2;
constexpr int kPhi1 = 3;

double Nominal(int finger) { return finger == 0 ? 0.0 : kPi; }

void Reset(EnvState& s, Rng& rng) {
  const EnvConfig& c = s.config;
  ElasticJoint radial;
  radial.position = radial.setpoint = c.object_width / 2.0 + kOpenGap;
  radial.k_passive = c.k_passive;
  radial.k_max = c.k_max;
  radial.mass = c.actuator_mass;
  radial.damping = c.actuator_damping;
  radial.control_lo = c.control_lo;
  radial.control_hi = c.control_hi;
  radial.limit_lo = 0.0;
  radial.limit_hi = 0.05;
  s.joints.clear();
  for (int finger = 0; finger < 2; ++finger) {
    ElasticJoint tangential;
    tangential.position = tangential.setpoint = Nominal(finger);
    tangential.k = tangential.k_lim = c.aux_stiffness;
    tangential.k_passive = tangential.k_max = c.aux_stiffness;
    tangential.mass = c.aux_mass;
    tangential.damping = c.aux_damping;
    tangential.control_lo = Nominal(finger) - kTangentialRange;
    tangential.control_hi = Nominal(finger) + kTangentialRange;
    tangential.limit_lo = Nominal(finger) - 1.5;
    tangential.limit_hi = Nominal(finger) + 1.5;
    s.joints.push_back(radial);
    s.joints.push_back(tangential);
  }
  s.object_pos = {0.0};
  s.object_vel = {0.0};
  const double sign = rng.Bernoulli(0.5) ? 1.0 : -1.0;
  s.goal.value = {sign * rng.Uniform(0.3, 0.7)};
  s.contact_normal = {0.0, 0.0};
}

void ApplyPose(EnvState& s, std::span<const double> pose) {
  const EnvConfig& c = s.config;
  for (int finger = 0; finger < 2; ++finger) {
    ElasticJoint& r = s.joints[2 * finger];
    ElasticJoint& phi = s.joints[2 * finger + 1];
    CommandSetpoint(r, r.setpoint + c.grip_scale * pose[2 * finger]);
    CommandSetpoint(phi, phi.setpoint + c.move_scale * pose[2 * finger + 1]);
  }
}

double Substep(EnvState& s, double h) {
  const EnvConfig& c = s.config;
  const double theta = s.object_pos[0];
  const double omega = s.object_vel[0];
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double half_w = c.object_width / 2.0;
  const double cy = c.object_offset;

  double torque = 0.0;
  double truth_sq = 0.0;
  for (int finger = 0; finger < 2; ++finger) {
    ElasticJoint& r = s.joints[2 * finger];
    ElasticJoint& phi = s.joints[2 * finger + 1];
    const double er_x = std::cos(phi.position);
    const double er_y = std::sin(phi.position);
    const double px = r.position * er_x;
    const double py = r.position * er_y;
    const double dx = px;
    const double dy = py - cy;
    // Fingertip in the block frame.
    const double bx = cos_t * dx + sin_t * dy;
    const double by = -sin_t * dx + cos_t * dy;
    const double side = finger == 0 ? 1.0 : -1.0;
    const double depth = half_w - side * bx;
    double normal = 0.0;
    double fx = 0.0, fy = 0.0;  // force on the fingertip
    if (side * bx > 0.0 && depth > 0.0 && std::abs(by) < kBlockLength / 2.0) {
      const double nx = side * cos_t;  // outward face normal
      const double ny = side * sin_t;
      const double tx = -sin_t;
      const double ty = cos_t;
      const double vfx = r.velocity * er_x - r.position * phi.velocity * er_y;
      const double vfy = r.velocity * er_y + r.position * phi.velocity * er_x;
      const double vox = -omega * dy;
      const double voy = omega * dx;
      const double rel_n = (vfx - vox) * nx + (vfy - voy) * ny;
      const double rel_t = (vfx - vox) * tx + (vfy - voy) * ty;
      normal = std::max(0.0, c.contact_stiffness * depth -
                                 c.contact_damping * rel_n);
      const double cap = c.friction * normal;
      const double friction = Clamp(-kPadViscosity * rel_t, -cap, cap);
      fx = normal * nx + friction * tx;
      fy = normal * ny + friction * ty;
      torque += dx * (-fy) - dy * (-fx);
      truth_sq += normal * normal + friction * friction;
    }
    s.contact_normal[finger] = normal;
    const double radial_force = fx * er_x + fy * er_y;
    const double tangential_force = -fx * er_y + fy * er_x;
    r = StepJoint(r, h, radial_force);
    phi = StepJoint(phi, h, r.position * tangential_force);
  }
  const double band = c.band_stiffness * kBandLever * kBandLever * theta;
  const double accel = (torque - band - kBlockDamping * omega) / c.object_mass;
  s.object_vel[0] += h * accel;
  s.object_pos[0] += h * s.object_vel[0];
  if (!std::isfinite(s.object_pos[0]) || !std::isfinite(s.object_vel[0])) {
    throw SimulationFault("block rotation became non-finite");
  }
  return std::sqrt(truth_sq);
}

void Observe(const EnvState& s, Observation& obs) {
  const double measured = s.object_pos[0] + s.measurement_noise[0];
  const ElasticJoint& r0 = s.joints[kR0];
  const ElasticJoint& p0 = s.joints[kPhi0];
  const ElasticJoint& r1 = s.joints[kR1];
  const ElasticJoint& p1 = s.joints[kPhi1];
  const double a0 = p0.position - Nominal(0);
  const double a1 = p1.position - Nominal(1);
  obs.kinematics = {r0.position, a0,          r1.position,   a1,
                    measured,    a0 - measured, a1 - measured, r0.velocity,
                    p0.velocity, r1.velocity, p1.velocity,   r0.setpoint,
                    p0.setpoint - Nominal(0), r1.setpoint,
                    p1.setpoint - Nominal(1)};
  obs.estimated_force = {s.force_estimate[0].filtered,
                         s.force_estimate[1].filtered};
  obs.joint_velocity = {r0.velocity, p0.velocity, r1.velocity, p1.velocity};
  obs.achieved_goal = {s.object_pos[0]};
}

bool Held(const EnvState& s) {
  return s.contact_normal.size() == 2 && s.contact_normal[0] > 0.0 &&
         s.contact_normal[1] > 0.0;
}

}  // namespace

const TaskHooks& FingersHooks() {
  static const TaskHooks hooks{&Reset, &ApplyPose, &Substep, &Observe, &Held};
  return hooks;
}

std::span<const int> GraspJoints(EnvId id) {
  static constexpr int kBlock[] = {0, 1};
  static constexpr int kChip[] = {0};
  static constexpr int kFingers[] = {kR0, kR1};
  switch (id) {
    case EnvId::kBlock:
      return kBlock;
    case EnvId::kChip:
      return kChip;
    case EnvId::kFingers:
      return kFingers;
  }
  return {};
}

int NoiseDim(EnvId id) {
  switch (id) {
    case EnvId::kBlock:
    case EnvId::kChip:
      return 2;
    case EnvId::kFingers:
      return 1;
  }
  return 0;
}

}  // namespace scape::internal
