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

#ifndef SCAPE_REPLAY_H_
#define SCAPE_REPLAY_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "scape/common.h"
#include "scape/demos.h"
#include "scape/env.h"

namespace scape {

struct Transition {
  Observation s;
  Vec a;  // flattened action, pose part first
  double r = 0.0;
  Observation s_next;
  Goal g;
  // True only for a real terminal state (breakage with early termination).
  // Running out of the horizon is a truncation and keeps the bootstrap.
  bool done = false;
  Goal achieved_goal;  // of s_next
  bool safety_intact = true;
  bool episode_overall = false;  // overall success flag of the source episode
};

// Fixed-capacity FIFO. Index 0 is the oldest entry.
class TransitionBuffer {
 public:
  explicit TransitionBuffer(std::size_t capacity = 1);

  void Add(Transition transition);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return data_.empty(); }
  const Transition& operator[](std::size_t i) const;
  Transition& operator[](std::size_t i);
  void Clear();

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // position of the oldest entry once full
  std::vector<Transition> data_;
};

enum class BufferId { kDemo, kSil, kRl };

std::string_view BufferName(BufferId id);

struct BufferSet {
  TransitionBuffer d_demo;
  TransitionBuffer d_sil;
  TransitionBuffer d_rl;

  BufferSet(std::size_t sil_capacity = 100000,
            std::size_t rl_capacity = 200000);

  const TransitionBuffer& Get(BufferId id) const;
};

// The episode's own transitions, with done set only for early termination.
std::vector<Transition> EpisodeTransitions(const Episode& episode,
                                           const EnvConfig& config);

// Each step once with its own goal, then k_future copies whose goal is the
// achieved goal of a uniformly drawn later observation of the same episode
// (s_next included). Rewards are recomputed under the substituted goal.
std::vector<Transition> HerRelabel(const Episode& episode, int k_future,
                                   const EnvConfig& config, Rng& rng);

// Appends the relabeled episode to d_rl and, when the episode is an overall
// success, its raw transitions to d_sil. Returns the d_rl entries added.
std::vector<Transition> StoreEpisode(BufferSet& buffers, const Episode& episode,
                                     int k_future, const EnvConfig& config,
                                     Rng& rng);

// Recomputes every stored reward under `config`.
void RecomputeRewards(TransitionBuffer& buffer, const EnvConfig& config);

// Fills d_demo with the raw demo transitions, sized to fit them all.
void LoadDemoBuffer(BufferSet& buffers, const Demo& demo,
                    const EnvConfig& config);

// d_demo iff sr < sr_ref. Throws InvalidInput outside [0, 1].
BufferId SelectImitationSource(double sr, double sr_ref);

// n uniform draws with replacement. Throws InvalidInput when the buffer is
// empty or n < 1.
std::vector<const Transition*> SampleBatch(const TransitionBuffer& buffer,
                                           int n, Rng& rng);

struct ImitationBatch {
  std::vector<const Transition*> transitions;
  BufferId source = BufferId::kDemo;  // buffer actually sampled
  bool fell_back = false;             // d_sil was requested but empty
};

ImitationBatch SampleImitation(const BufferSet& buffers, BufferId requested,
                               int n, Rng& rng);

// JSON lines: a header {buffer, capacity, size}, then one transition per line.
void WriteBuffer(std::ostream& out, const TransitionBuffer& buffer,
                 std::string_view name);

}  // namespace scape

#endif  // SCAPE_REPLAY_H_
