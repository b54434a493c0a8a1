# Copyright 2026 The SCAPE-Lite Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Stiffness-control learning with safety-aware rewards."""

from scape._scape import (
    Env,
    EnvConfig,
    ScapeError,
    UncertaintyConfig,
    compute_reward,
    conditions,
    default_config,
    demo_summary,
    emit_plots,
    exceeds_fragility,
    find_metrics_files,
    load_metrics,
    parse_config,
    run_experiment,
    select_imitation_source,
)

__all__ = [
    "Env",
    "EnvConfig",
    "ScapeError",
    "UncertaintyConfig",
    "compute_reward",
    "conditions",
    "default_config",
    "demo_summary",
    "emit_plots",
    "exceeds_fragility",
    "find_metrics_files",
    "load_metrics",
    "parse_config",
    "run_experiment",
    "select_imitation_source",
]
