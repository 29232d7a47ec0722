// Copyright 2026 The evgrid Authors
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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "evgrid/scene_sim.hpp"

namespace evgrid
{

/// Parses a YAML scene script. Throws ConfigError on malformed input.
///
///   name: crossing
///   duration: 4.0
///   tick_rate: 10
///   labeling: manual            # or auto
///   sensor: {beams: 1800, max_range: 60, range_noise: 0.02}
///   ground_truth: {v_gt_min: 0.5}
///   ego:
///     - {t: 0, x: 0, y: 0, heading: 0}
///   entities:
///     - name: car
///       kind: mover
///       size: [4.5, 1.8]
///       top_visible: true
///       trajectory:
///         - {t: 0, x: -10, y: 8, heading: 0}
///         - {t: 4, x: 10, y: 8, heading: 0}
///     - name: wall
///       kind: static_structure
///       box: {x: 0, y: -6, w: 30, h: 0.4, psi: 0}
SceneScript parse_scenario(std::string_view yaml_text);
SceneScript load_scenario(const std::filesystem::path & path);

/// Built-in scenario scripts, addressable as "canned:<name>".
const std::vector<std::string> & canned_scenario_names();
std::string canned_scenario_text(const std::string & name);
SceneScript canned_scenario(const std::string & name);

/// Resolves "canned:<name>" or a file path.
SceneScript resolve_scenario(const std::string & ref);

}  // namespace evgrid
