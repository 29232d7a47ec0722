# Copyright 2026 The evgrid Authors
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
"""Evidential dynamic occupancy grids: inspection, geometry, evaluation and dataset tools."""

from ._evgrid import (
    BeliefMasses,
    ConfigError,
    DataError,
    DynamicGrid,
    Error,
    PrCurve,
    RotatedBox,
    ValidationError,
    canned_scenarios,
    colorize,
    detect_classic,
    encode,
    evaluate,
    intersection_area,
    load_grid,
    load_tensor,
    pr_curve,
    read_labels,
    rotated_iou,
    simulate,
    validate_masses,
)

__all__ = [
    "BeliefMasses",
    "ConfigError",
    "DataError",
    "DynamicGrid",
    "Error",
    "PrCurve",
    "RotatedBox",
    "ValidationError",
    "canned_scenarios",
    "colorize",
    "detect_classic",
    "encode",
    "evaluate",
    "intersection_area",
    "load_grid",
    "load_tensor",
    "pr_curve",
    "read_labels",
    "rotated_iou",
    "simulate",
    "validate_masses",
]
