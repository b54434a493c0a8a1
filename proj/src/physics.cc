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

#include "scape/physics.h"

#include <cmath>

namespace scape {

void CommandSetpoint(ElasticJoint& joint, double setpoint) {
  joint.setpoint = Clamp(setpoint, joint.control_lo, joint.control_hi);
}

void CommandStiffness(ElasticJoint& joint, double k, double k_lim,
                      double k_floor) {
  joint.k_lim = Clamp(k_lim, k_floor, joint.k_max);
  joint.k = Clamp(k, k_floor, joint.k_lim);
}

double QuasiStaticForce(const ElasticJoint& joint) {
  return joint.k * (joint.setpoint - joint.position);
}

ForceChannel LowPass(ForceChannel channel, double raw, double dt) {
  if (!(dt > 0.0) || !(channel.tau > 0.0)) {
    throw InvalidInput("low-pass filter needs dt > 0 and tau > 0");
  }
  channel.raw = raw;
  channel.filtered += dt / (channel.tau + dt) * (raw - channel.filtered);
  return channel;
}

ElasticJoint StepJoint(ElasticJoint joint, double dt, double external_force) {
  if (!(dt > 0.0)) throw InvalidInput("joint step needs dt > 0");
  const double spring = QuasiStaticForce(joint);
  const double accel =
      (spring - joint.damping * joint.velocity + external_force) / joint.mass;
  joint.velocity += dt * accel;
  joint.position += dt * joint.velocity;
  if (joint.position < joint.limit_lo) {
    joint.position = joint.limit_lo;
    if (joint.velocity < 0.0) joint.velocity = 0.0;
  } else if (joint.position > joint.limit_hi) {
    joint.position = joint.limit_hi;
    if (joint.velocity > 0.0) joint.velocity = 0.0;
  }
  if (!std::isfinite(joint.position) || !std::isfinite(joint.velocity)) {
    throw SimulationFault("elastic joint state became non-finite");
  }
  return joint;
}

bool ExceedsFragility(double ground_truth_force, double fragility) {
  if (!(fragility > 0.0)) throw InvalidInput("fragility must be > 0");
  return std::abs(ground_truth_force) > fragility;
}

}  // namespace scape
