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
#include "scenforge/representation.hpp"

using namespace scenforge;
using testhelpers::bundled_repo;
using testhelpers::bundled_rules;
using testhelpers::left_turn_rep;

namespace {

rep::ScenarioRepresentation clean_rep() {
  rep::ScenarioRepresentation r = left_turn_rep();
  return r;
}

}  // namespace

TEST_CASE("R1: intersection plus broken line contradicts") {
  rep::ScenarioRepresentation r = clean_rep();
  r.transportation_facilities.road_marker = "broken_line";
  auto findings = rep::validate(r, bundled_repo(), bundled_rules());
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].rule_id == "R1");
  CHECK(findings[0].severity == rep::Severity::Contradiction);
  CHECK(rep::has_contradiction(findings));
}

TEST_CASE("consistent representation validates clean") {
  auto findings = rep::validate(clean_rep(), bundled_repo(), bundled_rules());
  CHECK(findings.empty());
}

TEST_CASE("R2: lane change across solid marking warns") {
  rep::ScenarioRepresentation r = clean_rep();
  r.road_topology.topology = "straight";
  r.transportation_facilities.road_marker = "solid_line";
  r.traffic_participants[0].lateral_oracle = "change_lane";
  auto findings = rep::validate(r, bundled_repo(), bundled_rules());
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].rule_id == "R2");
  CHECK(findings[0].severity == rep::Severity::Warning);
  CHECK_FALSE(rep::has_contradiction(findings));
}

TEST_CASE("R3: traffic light away from junctions warns") {
  rep::ScenarioRepresentation r = clean_rep();
  r.road_topology.topology = "straight";
  r.transportation_facilities.traffic_sign = "traffic_light";
  auto findings = rep::validate(r, bundled_repo(), bundled_rules());
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].rule_id == "R3");
}

TEST_CASE("R4: novel value in a closed slot contradicts") {
  rep::ScenarioRepresentation r = clean_rep();
  r.road_topology.topology = "hoverlane";
  auto findings = rep::validate(r, bundled_repo(), bundled_rules());
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].rule_id == "R4");
  CHECK(findings[0].severity == rep::Severity::Contradiction);
}

TEST_CASE("novel value in an open slot does not trigger R4") {
  rep::ScenarioRepresentation r = clean_rep();
  r.temporary_changes.change_type = "hovering drone";
  auto findings = rep::validate(r, bundled_repo(), bundled_rules());
  CHECK(findings.empty());
}

TEST_CASE("validate is pure: same input, same findings, rep untouched") {
  rep::ScenarioRepresentation r = clean_rep();
  r.transportation_facilities.road_marker = "broken_line";
  rep::ScenarioRepresentation copy = r;
  auto f1 = rep::validate(r, bundled_repo(), bundled_rules());
  auto f2 = rep::validate(r, bundled_repo(), bundled_rules());
  CHECK(r == copy);
  REQUIRE(f1.size() == f2.size());
  for (size_t i = 0; i < f1.size(); ++i) CHECK(f1[i].rule_id == f2[i].rule_id);
}

TEST_CASE("serialize key order follows tier priority") {
  const std::string out = rep::serialize(clean_rep());
  size_t climate = out.find("\"climate\"");
  size_t topo = out.find("\"road_topology\"");
  size_t tf = out.find("\"transportation_facilities\"");
  size_t tc = out.find("\"temporary_changes\"");
  size_t ev = out.find("\"ego_vehicle\"");
  size_t tp = out.find("\"traffic_participants\"");
  REQUIRE(climate != std::string::npos);
  CHECK(climate < topo);
  CHECK(topo < tf);
  CHECK(tf < tc);
  CHECK(tc < ev);
  CHECK(ev < tp);
}

TEST_CASE("serialize-deserialize round trip is the identity") {
  rep::ScenarioRepresentation r = clean_rep();
  r.traffic_participants[0].count = 3;
  rep::ScenarioRepresentation back = rep::deserialize(rep::serialize(r));
  CHECK(back == r);
  // byte-stable: serialize(deserialize(serialize)) == serialize
  CHECK(rep::serialize(back) == rep::serialize(r));
}

TEST_CASE("missing section names the key") {
  const char* missing_ego = R"({
    "climate": {"weather_type": "none", "density": "none", "time_of_day": "none"},
    "road_topology": {"topology": "none", "lanes": "none"},
    "transportation_facilities": {"road_marker": "none", "traffic_sign": "none"},
    "temporary_changes": {"change_type": "none", "position_relation": "none"},
    "traffic_participants": []
  })";
  try {
    rep::deserialize(missing_ego);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("ego_vehicle") != std::string::npos);
  }
}

TEST_CASE("unknown top-level key is rejected") {
  rep::ScenarioRepresentation r = clean_rep();
  std::string text = rep::serialize(r);
  text.insert(text.rfind('}'), ", \"bogus\": 1");
  CHECK_THROWS_AS(rep::deserialize(text), SchemaError);
}

TEST_CASE("malformed JSON raises ParseError") {
  CHECK_THROWS_AS(rep::deserialize("{"), ParseError);
}

TEST_CASE("participant count below one is rejected") {
  rep::ScenarioRepresentation r = clean_rep();
  std::string text = rep::serialize(r);
  auto pos = text.find("\"count\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 10, "\"count\": 0");
  CHECK_THROWS_AS(rep::deserialize(text), SchemaError);
}
