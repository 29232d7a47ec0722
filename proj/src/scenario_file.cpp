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

#include "evgrid/scenario_file.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

#include "evgrid/error.hpp"

namespace evgrid
{
namespace
{

template <typename T>
T scalar_or(const YAML::Node & node, const char * key, T fallback)
{
  const YAML::Node v = node[key];
  return v ? v.as<T>() : fallback;
}

TimedPose parse_pose(const YAML::Node & n)
{
  TimedPose p;
  if (n.IsSequence()) {
    if (n.size() < 3) {
      throw ConfigError("pose sequence needs [t, x, y(, heading)]");
    }
    p.t = n[0].as<double>();
    p.x = n[1].as<double>();
    p.y = n[2].as<double>();
    p.heading_deg = n.size() > 3 ? n[3].as<double>() : 0.0;
    return p;
  }
  if (!n["t"] || !n["x"] || !n["y"]) {
    throw ConfigError("pose needs t, x and y");
  }
  p.t = n["t"].as<double>();
  p.x = n["x"].as<double>();
  p.y = n["y"].as<double>();
  p.heading_deg = scalar_or(n, "heading", 0.0);
  return p;
}

std::vector<TimedPose> parse_trajectory(const YAML::Node & n)
{
  std::vector<TimedPose> out;
  if (!n) {
    return out;
  }
  if (!n.IsSequence()) {
    throw ConfigError("trajectory must be a list of poses");
  }
  for (const auto & p : n) {
    out.push_back(parse_pose(p));
  }
  return out;
}

Entity parse_entity(const YAML::Node & n, std::size_t index)
{
  Entity e;
  e.name = scalar_or<std::string>(n, "name", "entity" + std::to_string(index));
  if (!n["kind"]) {
    throw ConfigError("entity '" + e.name + "' has no kind");
  }
  e.kind = entity_kind_from_string(n["kind"].as<std::string>());
  if (const auto box = n["box"]) {
    e.footprint = RotatedBox{
      scalar_or(box, "x", 0.0), scalar_or(box, "y", 0.0), scalar_or(box, "w", 0.0),
      scalar_or(box, "h", 0.0), scalar_or(box, "psi", 0.0)};
  }
  if (const auto size = n["size"]) {
    if (!size.IsSequence() || size.size() != 2) {
      throw ConfigError("entity '" + e.name + "': size must be [w, h]");
    }
    e.footprint.w = size[0].as<double>();
    e.footprint.h = size[1].as<double>();
  }
  e.trajectory = parse_trajectory(n["trajectory"]);
  e.jitter_amplitude = scalar_or(n, "jitter_amplitude", 0.0);
  e.jitter_period = scalar_or(n, "jitter_period", 1.0);
  e.reveal_time = scalar_or(n, "reveal_time", 0.0);
  e.top_visible = scalar_or(n, "top_visible", e.kind == EntityKind::kMover);
  return e;
}

}  // namespace

SceneScript parse_scenario(std::string_view yaml_text)
{
  SceneScript s;
  try {
    const YAML::Node root = YAML::Load(std::string(yaml_text));
    if (!root.IsMap()) {
      throw ConfigError("scenario must be a mapping");
    }
    s.name = scalar_or<std::string>(root, "name", s.name);
    s.duration = scalar_or(root, "duration", s.duration);
    s.tick_rate = scalar_or(root, "tick_rate", s.tick_rate);
    s.labeling = scalar_or<std::string>(root, "labeling", s.labeling);
    if (const auto sensor = root["sensor"]) {
      s.sensor.beam_count = scalar_or(sensor, "beams", s.sensor.beam_count);
      s.sensor.max_range = scalar_or(sensor, "max_range", s.sensor.max_range);
      s.sensor.range_noise = scalar_or(sensor, "range_noise", s.sensor.range_noise);
    }
    if (const auto gt = root["ground_truth"]) {
      s.rules.v_gt_min = scalar_or(gt, "v_gt_min", s.rules.v_gt_min);
    }
    s.ego = parse_trajectory(root["ego"]);
    if (const auto ents = root["entities"]) {
      if (!ents.IsSequence()) {
        throw ConfigError("entities must be a list");
      }
      std::size_t i = 0;
      for (const auto & e : ents) {
        s.entities.push_back(parse_entity(e, i++));
      }
    }
  } catch (const YAML::Exception & ex) {
    throw ConfigError(std::string("scenario parse error: ") + ex.what());
  }
  s.validate();
  return s;
}

SceneScript load_scenario(const std::filesystem::path & path)
{
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot open scenario file " + path.string());
  }
  std::ostringstream os;
  os << is.rdbuf();
  return parse_scenario(os.str());
}

SceneScript canned_scenario(const std::string & name)
{
  return parse_scenario(canned_scenario_text(name));
}

SceneScript resolve_scenario(const std::string & ref)
{
  constexpr std::string_view kPrefix = "canned:";
  if (ref.rfind(kPrefix, 0) == 0) {
    return canned_scenario(ref.substr(kPrefix.size()));
  }
  return load_scenario(ref);
}

}  // namespace evgrid
