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

// Python bindings for the simulator, reward, demonstrations and harness.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "scape/demos.h"
#include "scape/env.h"
#include "scape/harness.h"
#include "scape/physics.h"
#include "scape/replay.h"

namespace py = pybind11;

namespace scape {
namespace {

py::dict ObservationDict(const Observation& o) {
  py::dict d;
  d["kinematics"] = o.kinematics;
  d["estimated_force"] = o.estimated_force;
  d["joint_velocity"] = o.joint_velocity;
  d["k"] = o.k;
  d["k_lim"] = o.k_lim;
  d["achieved_goal"] = o.achieved_goal;
  return d;
}

py::dict FlagsDict(const SuccessFlags& f) {
  py::dict d;
  d["task"] = f.task;
  d["safety"] = f.safety;
  d["overall"] = f.overall;
  return d;
}

py::dict RowDict(const MetricsRow& r) {
  py::dict d;
  d["kind"] = r.kind;
  d["epoch"] = r.epoch;
  d["stage"] = r.stage;
  d["env_steps"] = r.env_steps;
  d["task"] = r.task;
  d["safety"] = r.safety;
  d["overall"] = r.overall;
  d["explore_safety"] = r.explore_safety;
  d["explore_overall"] = r.explore_overall;
  d["regulator_sr"] = r.regulator_sr;
  d["mean_q"] = r.mean_q;
  d["mean_force"] = r.mean_force;
  d["mean_k"] = r.mean_k;
  d["source"] = r.source;
  d["q_filter_evaluations"] = r.q_filter_evaluations;
  d["demo_samples"] = r.demo_samples;
  d["sil_samples"] = r.sil_samples;
  return d;
}

// A seeded environment instance owning its state and random stream.
class PyEnv {
 public:
  PyEnv(const EnvConfig& config, std::uint64_t seed)
      : config_(config), rng_(seed) {
    ValidateConfig(config_);
  }

  py::dict Reset() {
    ResetResult r = scape::Reset(config_, rng_);
    state_ = std::move(r.state);
    started_ = true;
    py::dict d;
    d["observation"] = ObservationDict(r.observation);
    d["goal"] = r.goal.value;
    return d;
  }

  py::dict Step(const std::vector<double>& action) {
    if (!started_) throw InvalidInput("call reset() before step()");
    const StepResult s = scape::Step(state_, action, rng_);
    py::dict d;
    d["observation"] = ObservationDict(s.observation);
    d["reward"] = s.reward;
    d["done"] = s.done;
    d["flags"] = FlagsDict(s.flags);
    d["executed_action"] = s.executed_action;
    d["ground_truth_force"] = s.ground_truth_force;
    return d;
  }

  std::vector<double> ExpertAction() const {
    if (!started_) throw InvalidInput("call reset() before expert_action()");
    return scape::ExpertAction(state_);
  }

  int action_dim() const { return ActionDim(config_); }
  bool intact() const { return state_.intact; }
  double k() const { return state_.k; }
  int t() const { return state_.t; }

 private:
  EnvConfig config_;
  Rng rng_;
  EnvState state_;
  bool started_ = false;
};

}  // namespace
}  // namespace scape

PYBIND11_MODULE(_scape, m) {
  using namespace scape;
  m.doc() = "Stiffness-control learning from augmented position demos.";

  static py::exception<Error> error(m, "ScapeError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidInput& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<UncertaintyConfig>(m, "UncertaintyConfig")
      .def(py::init<>())
      .def_readwrite("measurement_noise", &UncertaintyConfig::measurement_noise)
      .def_readwrite("perturbation", &UncertaintyConfig::perturbation)
      .def_readwrite("control_failure", &UncertaintyConfig::control_failure)
      .def_readwrite("noise_amplitude", &UncertaintyConfig::noise_amplitude)
      .def_readwrite("perturbation_amplitude",
                     &UncertaintyConfig::perturbation_amplitude)
      .def_readwrite("control_failure_prob",
                     &UncertaintyConfig::control_failure_prob);

  py::class_<EnvConfig>(m, "EnvConfig")
      .def_property_readonly(
          "env_id", [](const EnvConfig& c) { return std::string(EnvName(c.env_id)); })
      .def_property(
          "position_control",
          [](const EnvConfig& c) { return c.action_mode == ActionMode::kPosition; },
          [](EnvConfig& c, bool pos) {
            c.action_mode = pos ? ActionMode::kPosition : ActionMode::kStiffness;
          })
      .def_readwrite("alpha", &EnvConfig::alpha)
      .def_readwrite("beta", &EnvConfig::beta)
      .def_readwrite("d", &EnvConfig::d)
      .def_readwrite("fragility", &EnvConfig::fragility)
      .def_readwrite("k_passive", &EnvConfig::k_passive)
      .def_readwrite("k_max", &EnvConfig::k_max)
      .def_readwrite("horizon", &EnvConfig::horizon)
      .def_readwrite("safety_reward", &EnvConfig::safety_reward)
      .def_readwrite("terminate_on_break", &EnvConfig::terminate_on_break)
      .def_readwrite("uncertainty", &EnvConfig::uncertainty)
      .def("to_text", [](const EnvConfig& c) { return FormatConfig(c); });

  m.def("default_config",
        [](const std::string& env) { return DefaultConfig(ParseEnvId(env)); },
        py::arg("env"));
  m.def("parse_config",
        [](const std::string& text, const EnvConfig& base) {
          return ParseConfig(text, base);
        },
        py::arg("text"), py::arg("base"));

  py::class_<PyEnv>(m, "Env")
      .def(py::init<const EnvConfig&, std::uint64_t>(), py::arg("config"),
           py::arg("seed") = 0)
      .def("reset", &PyEnv::Reset)
      .def("step", &PyEnv::Step, py::arg("action"))
      .def("expert_action", &PyEnv::ExpertAction)
      .def_property_readonly("action_dim", &PyEnv::action_dim)
      .def_property_readonly("intact", &PyEnv::intact)
      .def_property_readonly("k", &PyEnv::k)
      .def_property_readonly("t", &PyEnv::t);

  m.def(
      "compute_reward",
      [](const EnvConfig& config, const std::vector<double>& achieved,
         const std::vector<double>& goal, const std::vector<double>& force,
         const std::vector<double>& joint_velocity) {
        Observation o;
        o.achieved_goal = achieved;
        o.estimated_force = force;
        o.joint_velocity = joint_velocity;
        return ComputeReward(o, Goal{goal}, config);
      },
      py::arg("config"), py::arg("achieved"), py::arg("goal"),
      py::arg("force"), py::arg("joint_velocity"));
  m.def("exceeds_fragility", &ExceedsFragility, py::arg("ground_truth_force"),
        py::arg("fragility"));
  m.def(
      "select_imitation_source",
      [](double sr, double sr_ref) {
        return std::string(BufferName(SelectImitationSource(sr, sr_ref)));
      },
      py::arg("sr"), py::arg("sr_ref"));

  m.def(
      "demo_summary",
      [](const std::string& env, int count, std::uint64_t seed) {
        Rng rng(seed);
        const EnvConfig config = DefaultConfig(ParseEnvId(env));
        const Demo demo =
            AugmentDemo(GeneratePositionDemos(config, count, rng),
                        config.k_passive);
        py::list episodes;
        for (const Episode& e : demo.episodes) {
          py::dict d;
          d["length"] = e.length();
          d["flags"] = FlagsDict(e.final_flags);
          double k_sum = 0.0;
          for (const Observation& o : e.observations) k_sum += o.k;
          d["mean_k"] = k_sum / e.observations.size();
          episodes.append(d);
        }
        return episodes;
      },
      py::arg("env"), py::arg("count"), py::arg("seed") = 0,
      "Generates augmented demos and returns per-episode summaries.");

  m.def("conditions", [] {
    std::vector<std::string> out;
    for (Condition c : {Condition::kPosControl, Condition::kC1, Condition::kC2,
                        Condition::kC3, Condition::kC4, Condition::kC5,
                        Condition::kHybrid}) {
      out.emplace_back(ConditionName(c));
    }
    return out;
  });

  m.def(
      "run_experiment",
      [](const std::string& env, const std::string& condition,
         std::uint64_t seed, int epochs, int cycles, int eval_episodes,
         int updates_per_cycle, const std::string& out_dir,
         const std::function<void(py::dict)>& on_row) {
        ExperimentConfig config = MakeExperimentConfig(
            ParseEnvId(env), ParseCondition(condition), seed, epochs);
        config.cycles_per_epoch = cycles;
        config.eval_episodes = eval_episodes;
        config.learner.updates_per_cycle = updates_per_cycle;
        config.out_dir = out_dir;
        ExperimentHooks hooks;
        if (on_row) {
          hooks.on_row = [&](const MetricsRow& r) { on_row(RowDict(r)); };
        }
        const bool hybrid = config.condition == Condition::kHybrid;
        auto run = [&] {
          return hybrid ? RunHybridBaseline(config, hooks)
                        : RunExperiment(config, hooks);
        };
        ExperimentResult r;
        if (on_row) {
          r = run();  // the callback needs the GIL
        } else {
          py::gil_scoped_release release;
          r = run();
        }
        py::dict d;
        py::list rows;
        for (const MetricsRow& row : r.rows) rows.append(RowDict(row));
        d["rows"] = rows;
        d["aborted"] = r.aborted;
        d["error"] = r.error;
        d["config_hash"] = ConfigHash(config);
        return d;
      },
      py::arg("env") = "block", py::arg("condition") = "c5",
      py::arg("seed") = 0, py::arg("epochs") = 1, py::arg("cycles") = 50,
      py::arg("eval_episodes") = 20, py::arg("updates_per_cycle") = 40,
      py::arg("out_dir") = "", py::arg("on_row") = nullptr,
      "Runs one experiment and returns its metrics rows.");

  m.def(
      "load_metrics",
      [](const std::string& path) {
        const MetricsFile f = LoadMetrics(path);
        py::list rows;
        for (const MetricsRow& row : f.rows) rows.append(RowDict(row));
        py::dict d;
        d["header"] = f.header_json;
        d["rows"] = rows;
        return d;
      },
      py::arg("path"));
  m.def(
      "emit_plots",
      [](const std::vector<std::string>& files, const std::string& out_dir) {
        const PlotReport r = EmitPlots(files, out_dir);
        py::dict d;
        d["written"] = r.written;
        d["skipped"] = r.skipped;
        return d;
      },
      py::arg("metrics_files"), py::arg("out_dir"));
  m.def("find_metrics_files", &FindMetricsFiles, py::arg("root"));
}
