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

#include <doctest.h>

#include "helpers.hpp"
#include "scenforge/errors.hpp"
#include "scenforge/repository.hpp"
#include "scenforge/util.hpp"

using namespace scenforge;
using testhelpers::bundled_repo;

TEST_CASE("bundled repository loads with 17 slots and 6 tiers") {
  const repo::RepositoryConfig& config = bundled_repo();
  CHECK(config.slots.size() == 17);
  CHECK(config.tiers.size() == 6);
  CHECK(config.tier_priority(repo::TierName::Climate) == 1);
  CHECK(config.tier_priority(repo::TierName::RoadTopology) == 2);

  const repo::ElementSlot& topology = config.slot("RT.topology");
  for (const char* v : {"intersection", "roundabout", "t_junction"}) {
    CHECK(std::find(topology.vocabulary.begin(), topology.vocabulary.end(), v) !=
          topology.vocabulary.end());
  }
}

TEST_CASE("duplicate slot name raises SchemaError naming the slot") {
  const char* bad = R"({
    "version": "x",
    "tiers": [
      {"name": "Climate", "priority": 1}, {"name": "RoadTopology", "priority": 2},
      {"name": "TransportationFacilities", "priority": 3},
      {"name": "TemporaryChanges", "priority": 4},
      {"name": "EgoVehicle", "priority": 5}, {"name": "TrafficParticipants", "priority": 6}
    ],
    "slots": [
      {"tier": "RoadTopology", "name": "RT.topology", "vocabulary": ["a"]},
      {"tier": "RoadTopology", "name": "RT.topology", "vocabulary": ["b"]}
    ],
    "synonyms": {}
  })";
  try {
    repo::repository_from_json_text(bad);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("RT.topology") != std::string::npos);
  }
}

TEST_CASE("empty vocabulary raises SchemaError") {
  const char* bad = R"({
    "version": "x",
    "tiers": [
      {"name": "Climate", "priority": 1}, {"name": "RoadTopology", "priority": 2},
      {"name": "TransportationFacilities", "priority": 3},
      {"name": "TemporaryChanges", "priority": 4},
      {"name": "EgoVehicle", "priority": 5}, {"name": "TrafficParticipants", "priority": 6}
    ],
    "slots": [
      {"tier": "TransportationFacilities", "name": "TF.traffic_sign", "vocabulary": []}
    ],
    "synonyms": {}
  })";
  CHECK_THROWS_AS(repo::repository_from_json_text(bad), SchemaError);
}

TEST_CASE("malformed JSON raises ParseError") {
  CHECK_THROWS_AS(repo::repository_from_json_text("{nope"), ParseError);
}

TEST_CASE("tier priorities must be a permutation with Climate/RoadTopology first") {
  std::string base = R"({
    "version": "x",
    "tiers": [
      {"name": "Climate", "priority": 3}, {"name": "RoadTopology", "priority": 2},
      {"name": "TransportationFacilities", "priority": 1},
      {"name": "TemporaryChanges", "priority": 4},
      {"name": "EgoVehicle", "priority": 5}, {"name": "TrafficParticipants", "priority": 6}
    ],
    "slots": [{"tier": "RoadTopology", "name": "RT.topology", "vocabulary": ["a"]}],
    "synonyms": {}
  })";
  CHECK_THROWS_AS(repo::repository_from_json_text(base), SchemaError);
}

TEST_CASE("canonicalize: identity, synonym, novel, rejected") {
  const repo::RepositoryConfig& config = bundled_repo();
  const repo::ElementSlot& behavior = config.slot("EV.global_behavior");
  const repo::ElementSlot& topology = config.slot("RT.topology");
  const repo::ElementSlot& tc_type = config.slot("TC.type");

  auto r1 = repo::canonicalize(config, behavior, "straight forward");
  REQUIRE(repo::is_canonical(r1));
  CHECK(repo::canon_value(r1) == "go_forward");

  auto r2 = repo::canonicalize(config, topology, "intersection");
  REQUIRE(repo::is_canonical(r2));
  CHECK(repo::canon_value(r2) == "intersection");

  auto r3 = repo::canonicalize(config, tc_type, "hovering drone");
  REQUIRE(repo::is_novel(r3));
  CHECK(repo::canon_value(r3) == "hovering drone");

  auto r4 = repo::canonicalize(config, topology, "hoverlane");
  CHECK(repo::is_rejected(r4));
}

TEST_CASE("canonicalize is case- and whitespace-insensitive") {
  const repo::RepositoryConfig& config = bundled_repo();
  const repo::ElementSlot& topology = config.slot("RT.topology");
  for (const char* surface : {"T-Junction", "  t_junction  ", "T JUNCTION", "t-junction."}) {
    auto r = repo::canonicalize(config, topology, surface);
    REQUIRE(repo::is_canonical(r));
    CHECK(repo::canon_value(r) == "t_junction");
  }
}

TEST_CASE("canonicalize is idempotent on every canonical form") {
  const repo::RepositoryConfig& config = bundled_repo();
  for (const repo::ElementSlot& slot : config.slots) {
    for (const std::string& v : slot.vocabulary) {
      auto r = repo::canonicalize(config, slot, v);
      REQUIRE(repo::is_canonical(r));
      CHECK(repo::canon_value(r) == v);
    }
  }
}

TEST_CASE("slots_in_priority_order is a stable permutation led by Climate") {
  const repo::RepositoryConfig& config = bundled_repo();
  auto ordered = repo::slots_in_priority_order(config);
  REQUIRE(ordered.size() == config.slots.size());
  CHECK(ordered.front()->tier == repo::TierName::Climate);

  // permutation check
  std::set<std::string> names;
  for (const auto* s : ordered) names.insert(s->slot_name);
  CHECK(names.size() == config.slots.size());

  // determinism
  auto again = repo::slots_in_priority_order(config);
  for (size_t i = 0; i < ordered.size(); ++i) {
    CHECK(ordered[i]->slot_name == again[i]->slot_name);
  }

  // priorities never decrease
  int prev = 0;
  for (const auto* s : ordered) {
    int prio = config.tier_priority(s->tier);
    CHECK(prio >= prev);
    prev = prio;
  }
}
