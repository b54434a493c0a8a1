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

#ifndef SCAPE_COMMON_H_
#define SCAPE_COMMON_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scape {

using Vec = std::vector<double>;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller passed arguments that violate a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A gradient, loss or state value was NaN or infinite.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// The simulator reached a non-finite state; the episode counts as failed.
class SimulationFault : public Error {
 public:
  using Error::Error;
};

// The scripted expert could not produce enough successful episodes.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Seeded pseudo-random source. All stochastic code takes one of these by
// reference so a run is reproducible from its seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double Normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool Bernoulli(double p) { return Uniform(0.0, 1.0) < p; }
  // Uniform integer in [0, n).
  std::size_t Index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  std::uint64_t NextSeed() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline bool AllFinite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline double Norm(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

inline double Clamp(double value, double lo, double hi) {
  return value < lo ? lo : (value > hi ? hi : value);
}

}  // namespace scape

#endif  // SCAPE_COMMON_H_
