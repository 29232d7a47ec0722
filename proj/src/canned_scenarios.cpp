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

// Built-in scene scripts covering the classic detector's characteristic
// failure archetypes plus clean and negative reference scenes.

#include <map>
#include <string>
#include <vector>

#include "evgrid/error.hpp"
#include "evgrid/scenario_file.hpp"

namespace evgrid
{
namespace
{

// A low road-side berm is uncovered piece by piece from t = 2 s, so its
// visible end sweeps along the road at 8 m/s; the newly appearing cells are
// briefly explained by particles travelling with the sweep.
constexpr const char * kAppearingBoundary = R"yaml(
name: s1_appearing_boundary
duration: 6.0
tick_rate: 10
ego:
  - {t: 0, x: 0, y: 0, heading: 0}
entities:
  - name: car
    kind: mover
    size: [4.5, 1.8]
    trajectory:
      - {t: 0, x: -24, y: 7, heading: 0}
      - {t: 6, x: 24, y: 7, heading: 0}
  - name: berm_00
    kind: appearing_structure
    box: {x: 0.4, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 2.0
    top_visible: true
  - name: berm_01
    kind: appearing_structure
    box: {x: 1.2, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 2.1
    top_visible: true
  - name: berm_02
    kind: appearing_structure
    box: {x: 2.0, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 2.2
    top_visible: true
  - name: berm_03
    kind: appearing_structure
    box: {x: 2.8, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 2.3
    top_visible: true
  - name: berm_04
    kind: appearing_structure
    box: {x: 3.6, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 2.4
    top_visible: true
  - name: berm_05
    kind: appearing_structure
    box: {x: 4.4, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 2.5
    top_visible: true
  - name: berm_06
    kind: appearing_structure
    box: {x: 5.2, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 2.6
    top_visible: true
  - name: berm_07
    kind: appearing_structure
    box: {x: 6.0, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 2.7
    top_visible: true
  - name: berm_08
    kind: appearing_structure
    box: {x: 6.8, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 2.8
    top_visible: true
  - name: berm_09
    kind: appearing_structure
    box: {x: 7.6, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 2.9
    top_visible: true
  - name: berm_10
    kind: appearing_structure
    box: {x: 8.4, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 3.0
    top_visible: true
  - name: berm_11
    kind: appearing_structure
    box: {x: 9.2, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 3.1
    top_visible: true
  - name: berm_12
    kind: appearing_structure
    box: {x: 10.0, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 3.2
    top_visible: true
  - name: berm_13
    kind: appearing_structure
    box: {x: 10.8, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 3.3
    top_visible: true
  - name: berm_14
    kind: appearing_structure
    box: {x: 11.6, y: -11, w: 0.8, h: 2.5, psi: 0}
    reveal_time: 3.4
    top_visible: true
  - name: facade
    kind: static_structure
    box: {x: 0, y: 16, w: 40, h: 0.5, psi: 0}
)yaml";

// Vegetation beside the street whose extent oscillates.
constexpr const char * kSwayingBushes = R"yaml(
name: s2_swaying_bushes
duration: 5.0
tick_rate: 10
ego:
  - {t: 0, x: 0, y: 0, heading: 0}
entities:
  - name: bush_a
    kind: vegetation_clutter
    box: {x: 7, y: -7, w: 2.6, h: 2.2, psi: 15}
    jitter_amplitude: 0.9
    jitter_period: 1.3
    top_visible: true
  - name: bush_b
    kind: vegetation_clutter
    box: {x: -6, y: -8, w: 3.0, h: 2.4, psi: -20}
    jitter_amplitude: 0.8
    jitter_period: 1.1
    top_visible: true
  - name: bush_c
    kind: vegetation_clutter
    box: {x: 3, y: 9, w: 2.4, h: 2.4, psi: 0}
    jitter_amplitude: 1.0
    jitter_period: 1.7
    top_visible: true
  - name: wall
    kind: static_structure
    box: {x: 0, y: -14, w: 36, h: 0.5, psi: 0}
)yaml";

// The ego drives along a long barrier while traffic approaches.
constexpr const char * kTrafficBarrier = R"yaml(
name: s3_traffic_barrier
duration: 5.0
tick_rate: 10
ego:
  - {t: 0, x: -20, y: 0, heading: 0}
  - {t: 5, x: 20, y: 0, heading: 0}
entities:
  - name: barrier
    kind: static_structure
    box: {x: 0, y: -3.5, w: 80, h: 0.6, psi: 0}
  - name: oncoming
    kind: mover
    size: [4.6, 1.9]
    trajectory:
      - {t: 0, x: 30, y: 4, heading: 180}
      - {t: 5, x: -20, y: 4, heading: 180}
)yaml";

// Several road users crossing in front of a waiting ego.
constexpr const char * kIntersection = R"yaml(
name: s4_intersection
duration: 6.0
tick_rate: 10
ego:
  - {t: 0, x: 0, y: 0, heading: 90}
entities:
  - name: car_east
    kind: mover
    size: [4.5, 1.8]
    trajectory:
      - {t: 0, x: -28, y: 12, heading: 0}
      - {t: 6, x: 26, y: 12, heading: 0}
  - name: car_west
    kind: mover
    size: [4.8, 1.9]
    trajectory:
      - {t: 0, x: 25, y: 17, heading: 180}
      - {t: 6, x: -23, y: 17, heading: 180}
  - name: van_north
    kind: mover
    size: [5.5, 2.1]
    trajectory:
      - {t: 0, x: -8, y: -25, heading: 90}
      - {t: 6, x: -8, y: 20, heading: 90}
  - name: corner_ne
    kind: static_structure
    box: {x: 16, y: 26, w: 14, h: 8, psi: 0}
  - name: corner_nw
    kind: static_structure
    box: {x: -18, y: 26, w: 14, h: 8, psi: 0}
)yaml";

// One clean vehicle passing the parked ego.
constexpr const char * kSingleVehicle = R"yaml(
name: s4_single_vehicle
duration: 6.0
tick_rate: 10
ego:
  - {t: 0, x: 0, y: 0, heading: 0}
entities:
  - name: car
    kind: mover
    size: [4.5, 1.8]
    trajectory:
      - {t: 0, x: -22, y: 8, heading: 0}
      - {t: 6, x: 22, y: 8, heading: 0}
)yaml";

// A long bus passes behind a pillar; the pillar's shadow cuts the bus
// into two separately clustered parts.
constexpr const char * kSplitVehicle = R"yaml(
name: s4_split_vehicle
duration: 5.0
tick_rate: 10
ego:
  - {t: 0, x: 0, y: 0, heading: 0}
entities:
  - name: bus
    kind: mover
    size: [14.0, 2.6]
    trajectory:
      - {t: 0, x: -20, y: 11, heading: 0}
      - {t: 5, x: 15, y: 11, heading: 0}
  - name: pillar
    kind: static_structure
    box: {x: 0, y: 4, w: 1.2, h: 1.2, psi: 0}
)yaml";

// Two cars in a platoon with a one-metre gap.
constexpr const char * kCloseVehicles = R"yaml(
name: s5_close_vehicles
duration: 5.0
tick_rate: 10
ego:
  - {t: 0, x: 0, y: 0, heading: 0}
entities:
  - name: lead
    kind: mover
    size: [4.5, 1.8]
    trajectory:
      - {t: 0, x: -14.5, y: 8, heading: 0}
      - {t: 5, x: 20.5, y: 8, heading: 0}
  - name: follower
    kind: mover
    size: [4.5, 1.8]
    trajectory:
      - {t: 0, x: -20, y: 8, heading: 0}
      - {t: 5, x: 15, y: 8, heading: 0}
)yaml";

// Night drive through an empty street.
constexpr const char * kEmptyStreet = R"yaml(
name: empty_street
duration: 4.0
tick_rate: 10
ego:
  - {t: 0, x: -10, y: 0, heading: 0}
  - {t: 4, x: 10, y: 0, heading: 0}
entities:
  - name: facade_north
    kind: static_structure
    box: {x: 0, y: 9, w: 70, h: 0.5, psi: 0}
  - name: facade_south
    kind: static_structure
    box: {x: 0, y: -9, w: 70, h: 0.5, psi: 0}
)yaml";

// Vegetation and structure only, no road users.
constexpr const char * kClutterOnly = R"yaml(
name: clutter_only
duration: 4.0
tick_rate: 10
ego:
  - {t: 0, x: 0, y: 0, heading: 0}
entities:
  - name: hedge
    kind: vegetation_clutter
    box: {x: -4, y: 7, w: 3.2, h: 2.0, psi: 10}
    jitter_amplitude: 0.8
    jitter_period: 1.4
    top_visible: true
  - name: shrub
    kind: vegetation_clutter
    box: {x: 9, y: -5, w: 2.2, h: 2.2, psi: -30}
    jitter_amplitude: 0.7
    jitter_period: 1.0
    top_visible: true
  - name: kiosk
    kind: static_structure
    box: {x: -10, y: -9, w: 3.0, h: 2.5, psi: 0}
)yaml";

const std::map<std::string, const char *> & registry()
{
  static const std::map<std::string, const char *> kScripts = {
    {"s1_appearing_boundary", kAppearingBoundary},
    {"s2_swaying_bushes", kSwayingBushes},
    {"s3_traffic_barrier", kTrafficBarrier},
    {"s4_intersection", kIntersection},
    {"s4_single_vehicle", kSingleVehicle},
    {"s4_split_vehicle", kSplitVehicle},
    {"s5_close_vehicles", kCloseVehicles},
    {"empty_street", kEmptyStreet},
    {"clutter_only", kClutterOnly},
  };
  return kScripts;
}

}  // namespace

const std::vector<std::string> & canned_scenario_names()
{
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> names;
    for (const auto & [name, text] : registry()) {
      names.push_back(name);
    }
    return names;
  }();
  return kNames;
}

std::string canned_scenario_text(const std::string & name)
{
  const auto it = registry().find(name);
  if (it == registry().end()) {
    throw ConfigError("unknown canned scenario '" + name + "'");
  }
  return it->second;
}

}  // namespace evgrid
