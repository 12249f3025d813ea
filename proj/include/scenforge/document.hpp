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

#ifndef SCENFORGE_DOCUMENT_HPP
#define SCENFORGE_DOCUMENT_HPP

#include <map>
#include <string>
#include <vector>

#include "scenforge/lane_map.hpp"

namespace scenforge::doc {

inline constexpr const char* kToolName = "scenforge";
inline constexpr const char* kToolVersion = "0.1.0";
// Fixed header date: emitted bytes are a pure function of the document.
inline constexpr const char* kHeaderDate = "2025-01-01T00:00:00";

struct Meta {
  std::string name;
  std::string description;  // the source description text
  std::string source_hash;  // fnv1a64 hex of the source text
};

struct EnvironmentPart {
  std::string fragment_id;
  std::string xml;  // instantiated fragment (an OpenSCENARIO element)
};

struct SpawnState {
  std::string lane_id;
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians
  double speed = 0.0;    // m/s
};

struct Entity {
  std::string actor_id;
  std::string category;  // car, truck, van, motorcycle, bicycle, pedestrian, misc
  std::string fragment_id;
  std::string xml;  // instantiated object body (Vehicle/Pedestrian/MiscObject)
  SpawnState spawn;
  double length = 4.5;
  double width = 1.9;
  bool is_ego = false;
  // Right-of-way flag consumed by the yield monitor.
  bool priority = false;
};

struct Trigger {
  enum class Kind { OnStart, AfterPrevious, OnDistanceToEgo };
  Kind kind = Kind::OnStart;
  double distance = 0.0;  // OnDistanceToEgo threshold, meters
  double delay = 0.0;     // seconds, applies after the condition holds
};

// The standard maneuver vocabulary of storyboard events.
enum class StandardAction {
  Accelerate,
  Decelerate,
  Cruise,
  Yield,
  ChangeLane,  // side resolved against lane adjacency at assembly
  ChangeLaneLeft,
  ChangeLaneRight,
  KeepLane,
  Stop,
  Autopilot,
};

const char* standard_action_str(StandardAction a);
bool standard_action_from_str(const std::string& s, StandardAction* out);

struct StoryEvent {
  std::string name;  // "<actor>_ev<k>_<action>"
  StandardAction action = StandardAction::Autopilot;
  std::string action_xml;  // instantiated event fragment (a PrivateAction etc.)
  Trigger trigger;
  // Numeric inputs the executor replays (target_speed, duration, direction...).
  std::map<std::string, double> params;
};

struct ActorStory {
  std::string actor_id;
  std::vector<StoryEvent> events;
};

struct MonitorCriterion {
  std::string monitor_id;  // RRL, RSS, RSL, LI, CSL, WD, VRR, OR, C, TO
  std::string xml;         // instantiated criteria Condition element
  double value = 0.0;      // TO carries the timeout limit in seconds
};

struct RouteAssignment {
  std::string actor_id;
  corpus::RouteCandidate route;
  // Arc positions of the start/end waypoints on their lanes; what the
  // emitted LanePosition `s` attributes carry.
  double start_s = 0.0;
  double end_s = 0.0;
};

// The OpenSCENARIO document under construction: ordered sections holding
// instantiated fragment texts plus the structured metadata assembly derived.
struct TargetDocument {
  Meta meta;
  std::string map_id;
  std::string map_fragment_xml;
  std::vector<EnvironmentPart> environment;
  std::vector<std::string> parameter_decls;  // ParameterDeclaration elements
  std::vector<Entity> entities;
  std::vector<ActorStory> stories;
  std::vector<MonitorCriterion> monitors;
  std::vector<RouteAssignment> routes;
  std::string road_marker = "none";  // document-level marking, drives CSL

  const Entity* find_entity(const std::string& actor_id) const;
  const Entity* ego() const;
  const RouteAssignment* find_route(const std::string& actor_id) const;

  // Throws EmitError naming the offending section: storyboard actors must
  // exist, routes must resolve, exactly one map reference must be set.
  void check_invariants() const;
};

}  // namespace scenforge::doc

#endif  // SCENFORGE_DOCUMENT_HPP
