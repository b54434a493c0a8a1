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

#ifndef SCAPE_PHYSICS_H_
#define SCAPE_PHYSICS_H_

#include "scape/common.h"

namespace scape {

// One series-elastic actuator driving a single degree of freedom. Units are
// SI and depend on the joint: m, N/m and Ns/m for prismatic joints; rad,
// Nm/rad and Nms/rad for revolute ones.
struct ElasticJoint {
  double position = 0.0;
  double setpoint = 0.0;
  double velocity = 0.0;
  double k = 0.0;          // active stiffness, 0 < k <= k_lim
  double k_lim = 0.0;      // commanded stiffness ceiling, k_lim <= k_max
  double k_passive = 0.0;  // inherent stiffness used by position control
  double k_max = 0.0;
  double mass = 1.0;  // or rotational inertia
  double damping = 0.0;
  double control_lo = -1.0;  // setpoint range
  double control_hi = 1.0;
  double limit_lo = -1.0;  // mechanical travel
  double limit_hi = 1.0;
};

// Clamps `setpoint` into the joint's control range.
void CommandSetpoint(ElasticJoint& joint, double setpoint);

// Applies the stiffness pair with k_lim in [k_floor, k_max] and k in
// [k_floor, k_lim].
void CommandStiffness(ElasticJoint& joint, double k, double k_lim,
                      double k_floor);

// Spring force from the series elasticity, k * (setpoint - position). Positive
// when the setpoint leads the position.
double QuasiStaticForce(const ElasticJoint& joint);

// First-order low-pass filter state for one force signal.
struct ForceChannel {
  double raw = 0.0;
  double filtered = 0.0;
  double tau = 0.05;  // s
};

// filtered <- filtered + dt / (tau + dt) * (raw - filtered).
ForceChannel LowPass(ForceChannel channel, double raw, double dt);

// Semi-implicit Euler step under the spring force, viscous damping and
// `external_force`. The position is clamped to the mechanical limits, zeroing
// the velocity component that drives into the stop. Throws SimulationFault if
// the state becomes non-finite.
ElasticJoint StepJoint(ElasticJoint joint, double dt, double external_force);

// True iff |ground_truth_force| > fragility.
bool ExceedsFragility(double ground_truth_force, double fragility);

// Latched intact flag: once broken, always broken within an episode.
inline bool UpdateIntact(bool intact, double ground_truth_force,
                         double fragility) {
  return intact && !ExceedsFragility(ground_truth_force, fragility);
}

}  // namespace scape

#endif  // SCAPE_PHYSICS_H_
