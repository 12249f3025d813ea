// Copyright 2025 Scenforge Contributors
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

#ifndef SCENFORGE_EXECUTOR_HPP
#define SCENFORGE_EXECUTOR_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "scenforge/corpus.hpp"
#include "scenforge/document.hpp"

namespace scenforge::exec {

// Appendix-style monitor identifiers.
inline const std::vector<std::string>& monitor_ids() {
  static const std::vector<std::string> kIds = {"RRL", "RSS", "RSL", "LI",  "CSL",
                                                "WD",  "VRR", "OR",  "C",   "TO"};
  return kIds;
}

struct MonitorSpec {
  std::set<std::string> enabled = {"RRL", "RSS", "RSL", "LI", "CSL",
                                   "WD",  "VRR", "OR",  "C",  "TO"};
  double timeout_limit = 0.0;     // seconds; 0 = derive from route and limit
  double speed_tolerance = 0.05;  // RSL: fraction over the limit
  double out_of_road_margin = 0.5;  // OR: meters beyond the full lane width
  double stop_duration = 1.0;       // RSS: required standstill seconds
  double wrong_direction_duration = 1.0;  // WD: sustained seconds
};

// Maximum allowed scenario time: route length over 10% of the speed limit.
double timeout_limit(double route_length, double speed_limit);

struct ViolationEvent {
  std::string monitor_id;
  double time = 0.0;
  std::string actor;
  std::string detail;
};

struct ActorState {
  std::string actor_id;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  std::string lane_id;
  double s = 0.0;              // arc position on lane_id
  double lateral_offset = 0.0; // meters from lane centerline, +left
  double route_s = 0.0;        // progress along assigned route polyline
};

struct WorldState {
  double time = 0.0;
  std::vector<ActorState> actors;
  std::map<std::string, corpus::SignalHead::Phase> signal_phases;
  std::vector<std::string> active_events;
  std::vector<std::string> completed_events;

  const ActorState* find_actor(const std::string& id) const;
};

struct EvaluationReport {
  std::string scenario;
  std::map<std::string, int> counts;  // monitor id -> event count
  std::vector<ViolationEvent> events;
  double duration = 0.0;
  bool goal_reached = false;
  bool timed_out = false;

  std::string to_json() const;
};

// Replayed ego trace; linear interpolation between frames, held after the
// last one.
struct EgoTraceFrame {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
};

struct ScriptedEgo {
  std::vector<EgoTraceFrame> frames;

  static ScriptedEgo from_file(const std::string& path);
  static ScriptedEgo from_json_text(const std::string& text);
  EgoTraceFrame at(double t) const;
};

// Follows the assigned ego route at 80% of the map speed limit.
struct LaneFollowEgo {};

using EgoPolicy = std::variant<ScriptedEgo, LaneFollowEgo>;

// Fixed integration step; all monitor thresholds are calibrated for it.
inline constexpr double kDt = 0.1;

class Simulation {
public:
  Simulation(const doc::TargetDocument& document, const corpus::MiniMap& map,
             MonitorSpec spec, EgoPolicy ego_policy);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // One fixed step of kDt: advance actors, fire triggers, run monitors.
  void step();

  const WorldState& state() const;
  bool finished() const;
  EvaluationReport report() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Simulates until the ego reaches its goal, a terminal ego collision or the
// time limit. The document must reference a corpus map (MapMismatchError).
EvaluationReport run(const doc::TargetDocument& document,
                     const corpus::DslCorpus& corpus, const MonitorSpec& spec,
                     const EgoPolicy& ego_policy);

// Oriented-bounding-box overlap (separating-axis test).
struct Obb {
  double cx = 0.0;
  double cy = 0.0;
  double heading = 0.0;
  double length = 4.5;
  double width = 1.9;
};

bool obb_overlap(const Obb& a, const Obb& b);

}  // namespace scenforge::exec

#endif  // SCENFORGE_EXECUTOR_HPP
