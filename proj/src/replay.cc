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

#include "scape/replay.h"

#include <ostream>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "json_io.h"

namespace scape {

TransitionBuffer::TransitionBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidInput("buffer capacity must be positive");
}

void TransitionBuffer::Add(Transition transition) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(transition));
    return;
  }
  data_[head_] = std::move(transition);
  head_ = (head_ + 1) % capacity_;
}

const Transition& TransitionBuffer::operator[](std::size_t i) const {
  return data_[(head_ + i) % data_.size()];
}

Transition& TransitionBuffer::operator[](std::size_t i) {
  return data_[(head_ + i) % data_.size()];
}

void TransitionBuffer::Clear() {
  data_.clear();
  head_ = 0;
}

std::string_view BufferName(BufferId id) {
  switch (id) {
    case BufferId::kDemo:
      return "d_demo";
    case BufferId::kSil:
      return "d_sil";
    case BufferId::kRl:
      return "d_rl";
  }
  return "";
}

BufferSet::BufferSet(std::size_t sil_capacity, std::size_t rl_capacity)
    : d_demo(1), d_sil(sil_capacity), d_rl(rl_capacity) {}

const TransitionBuffer& BufferSet::Get(BufferId id) const {
  switch (id) {
    case BufferId::kDemo:
      return d_demo;
    case BufferId::kSil:
      return d_sil;
    case BufferId::kRl:
      break;
  }
  return d_rl;
}

std::vector<Transition> EpisodeTransitions(const Episode& episode,
                                           const EnvConfig& config) {
  const int length = episode.length();
  if (static_cast<int>(episode.observations.size()) != length + 1) {
    throw InvalidInput("episode needs one more observation than actions");
  }
  std::vector<Transition> out;
  out.reserve(length);
  for (int t = 0; t < length; ++t) {
    Transition tr;
    tr.s = episode.observations[t];
    tr.a = episode.actions[t];
    tr.s_next = episode.observations[t + 1];
    tr.g = episode.goal;
    tr.r = ComputeReward(tr.s_next, tr.g, config);
    const bool ended = t < static_cast<int>(episode.dones.size()) &&
                       episode.dones[t];
    tr.done = ended && t + 1 < config.horizon;
    tr.achieved_goal.value = tr.s_next.achieved_goal;
    tr.safety_intact = t < static_cast<int>(episode.intact.size())
                           ? episode.intact[t]
                           : true;
    tr.episode_overall = episode.final_flags.overall;
    out.push_back(std::move(tr));
  }
  return out;
}

std::vector<Transition> HerRelabel(const Episode& episode, int k_future,
                                   const EnvConfig& config, Rng& rng) {
  if (k_future < 0) throw InvalidInput("k_future must be >= 0");
  std::vector<Transition> raw = EpisodeTransitions(episode, config);
  const int length = static_cast<int>(raw.size());
  std::vector<Transition> out;
  out.reserve(raw.size() * (1 + k_future));
  for (int t = 0; t < length; ++t) {
    out.push_back(raw[t]);
    for (int k = 0; k < k_future; ++k) {
      // Observation indices t + 1 .. length are at or after s_next.
      const int j = t + 1 + static_cast<int>(rng.Index(length - t));
      Transition copy = raw[t];
      copy.g.value = episode.observations[j].achieved_goal;
      copy.r = ComputeReward(copy.s_next, copy.g, config);
      out.push_back(std::move(copy));
    }
  }
  return out;
}

std::vector<Transition> StoreEpisode(BufferSet& buffers, const Episode& episode,
                                     int k_future, const EnvConfig& config,
                                     Rng& rng) {
  std::vector<Transition> relabeled =
      HerRelabel(episode, k_future, config, rng);
  for (const Transition& tr : relabeled) buffers.d_rl.Add(tr);
  if (episode.final_flags.overall) {
    for (Transition& tr : EpisodeTransitions(episode, config)) {
      buffers.d_sil.Add(std::move(tr));
    }
  }
  return relabeled;
}

void RecomputeRewards(TransitionBuffer& buffer, const EnvConfig& config) {
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    Transition& tr = buffer[i];
    tr.r = ComputeReward(tr.s_next, tr.g, config);
  }
}

void LoadDemoBuffer(BufferSet& buffers, const Demo& demo,
                    const EnvConfig& config) {
  std::vector<Transition> all;
  for (const Episode& episode : demo.episodes) {
    for (Transition& tr : EpisodeTransitions(episode, config)) {
      all.push_back(std::move(tr));
    }
  }
  if (all.empty()) throw InvalidInput("demo holds no transitions");
  buffers.d_demo = TransitionBuffer(all.size());
  for (Transition& tr : all) buffers.d_demo.Add(std::move(tr));
}

BufferId SelectImitationSource(double sr, double sr_ref) {
  if (!(sr >= 0.0 && sr <= 1.0) || !(sr_ref >= 0.0 && sr_ref <= 1.0)) {
    throw InvalidInput("success rates must lie in [0, 1]");
  }
  return sr < sr_ref ? BufferId::kDemo : BufferId::kSil;
}

std::vector<const Transition*> SampleBatch(const TransitionBuffer& buffer,
                                           int n, Rng& rng) {
  if (buffer.empty()) throw InvalidInput("cannot sample an empty buffer");
  if (n < 1) throw InvalidInput("batch size must be >= 1");
  std::vector<const Transition*> batch;
  batch.reserve(n);
  for (int i = 0; i < n; ++i) batch.push_back(&buffer[rng.Index(buffer.size())]);
  return batch;
}

ImitationBatch SampleImitation(const BufferSet& buffers, BufferId requested,
                               int n, Rng& rng) {
  ImitationBatch out;
  out.source = requested;
  if (requested == BufferId::kSil && buffers.d_sil.empty()) {
    out.source = BufferId::kDemo;
    out.fell_back = true;
  }
  out.transitions = SampleBatch(buffers.Get(out.source), n, rng);
  return out;
}

void WriteBuffer(std::ostream& out, const TransitionBuffer& buffer,
                 std::string_view name) {
  nlohmann::json header = {{"buffer", std::string(name)},
                           {"capacity", buffer.capacity()},
                           {"size", buffer.size()}};
  out << header.dump() << "\n";
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const Transition& tr = buffer[i];
    nlohmann::json line = {{"s", internal::ToJson(tr.s)},
                           {"a", tr.a},
                           {"r", tr.r},
                           {"s_next", internal::ToJson(tr.s_next)},
                           {"g", tr.g.value},
                           {"done", tr.done},
                           {"achieved_goal", tr.achieved_goal.value},
                           {"safety_intact", tr.safety_intact},
                           {"episode_overall", tr.episode_overall}};
    out << line.dump() << "\n";
  }
}

}  // namespace scape
