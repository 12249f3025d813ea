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

#ifndef SCENFORGE_TESTS_HELPERS_HPP
#define SCENFORGE_TESTS_HELPERS_HPP

#include <string>

#include "scenforge/corpus.hpp"
#include "scenforge/representation.hpp"
#include "scenforge/repository.hpp"

namespace testhelpers {

inline std::string data_dir() { return SCENFORGE_SOURCE_DATA_DIR; }

inline const scenforge::repo::RepositoryConfig& bundled_repo() {
  static const auto config =
      scenforge::repo::load_repository(data_dir() + "/repository.json");
  return config;
}

inline const scenforge::rep::RuleSet& bundled_rules() {
  static const auto rules =
      scenforge::rep::RuleSet::from_file(data_dir() + "/rules.json");
  return rules;
}

inline const scenforge::corpus::DslCorpus& bundled_corpus() {
  static const auto corpus = scenforge::corpus::DslCorpus::load(data_dir() + "/corpus");
  return corpus;
}

// The worked left-turn example: intersection, oncoming car that yields while
// turning left.
inline scenforge::rep::ScenarioRepresentation left_turn_rep() {
  scenforge::rep::ScenarioRepresentation r;
  r.road_topology.topology = "intersection";
  r.road_topology.lanes = "two_lanes";
  r.ego_vehicle.vehicle_type = "car";
  r.ego_vehicle.global_behavior = "go_forward";
  scenforge::rep::TrafficParticipant p;
  p.participant_type = "car";
  p.position_relation = "opposite";
  p.longitudinal_oracle = "yield";
  p.global_behavior = "turn_left";
  r.traffic_participants.push_back(p);
  r.source_text = "Unprotected left turn for traffic vehicle";
  return r;
}

}  // namespace testhelpers

#endif  // SCENFORGE_TESTS_HELPERS_HPP
