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

#include "scenforge/document.hpp"

#include "scenforge/errors.hpp"

namespace scenforge::doc {

namespace {

const struct {
  StandardAction action;
  const char* str;
} kActionTable[] = {
    {StandardAction::Accelerate, "accelerate"},
    {StandardAction::Decelerate, "decelerate"},
    {StandardAction::Cruise, "cruise"},
    {StandardAction::Yield, "yield"},
    {StandardAction::ChangeLane, "change_lane"},
    {StandardAction::ChangeLaneLeft, "change_lane_left"},
    {StandardAction::ChangeLaneRight, "change_lane_right"},
    {StandardAction::KeepLane, "keep_lane"},
    {StandardAction::Stop, "stop"},
    {StandardAction::Autopilot, "autopilot"},
};

}  // namespace

const char* standard_action_str(StandardAction a) {
  for (const auto& e : kActionTable) {
    if (e.action == a) return e.str;
  }
  return "?";
}

bool standard_action_from_str(const std::string& s, StandardAction* out) {
  for (const auto& e : kActionTable) {
    if (s == e.str) {
      if (out) *out = e.action;
      return true;
    }
  }
  return false;
}

const Entity* TargetDocument::find_entity(const std::string& actor_id) const {
  for (const Entity& e : entities) {
    if (e.actor_id == actor_id) return &e;
  }
  return nullptr;
}

const Entity* TargetDocument::ego() const {
  for (const Entity& e : entities) {
    if (e.is_ego) return &e;
  }
  return nullptr;
}

const RouteAssignment* TargetDocument::find_route(const std::string& actor_id) const {
  for (const RouteAssignment& r : routes) {
    if (r.actor_id == actor_id) return &r;
  }
  return nullptr;
}

void TargetDocument::check_invariants() const {
  if (map_id.empty()) throw EmitError("document: map reference is missing");
  for (const ActorStory& story : stories) {
    if (!find_entity(story.actor_id)) {
      throw EmitError("document: storyboard references unknown actor '" +
                      story.actor_id + "'");
    }
  }
  for (const RouteAssignment& route : routes) {
    if (!find_entity(route.actor_id)) {
      throw EmitError("document: route assigned to unknown actor '" +
                      route.actor_id + "'");
    }
    if (route.route.map_id != map_id) {
      throw EmitError("document: route for '" + route.actor_id +
                      "' belongs to map '" + route.route.map_id + "', document uses '" +
                      map_id + "'");
    }
  }
  if (!ego()) throw EmitError("document: no ego entity");
}

}  // namespace scenforge::doc
