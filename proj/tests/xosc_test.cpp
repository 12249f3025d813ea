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
#include "scenforge/assembler.hpp"
#include "scenforge/errors.hpp"
#include "scenforge/xosc.hpp"

using namespace scenforge;
using testhelpers::bundled_corpus;
using testhelpers::bundled_repo;
using testhelpers::bundled_rules;
using testhelpers::left_turn_rep;

namespace {

doc::TargetDocument golden_document() {
  assembler::AssemblyContext context{bundled_corpus(), bundled_repo(), bundled_rules()};
  return assembler::assemble(left_turn_rep(), context, 11).document;
}

}  // namespace

TEST_CASE("emit produces well-formed XML with one Entities section") {
  const doc::TargetDocument document = golden_document();
  const std::string bytes = xosc::emit(document);
  xml::Node root = xml::parse_document(bytes);
  CHECK(root.name == "OpenSCENARIO");
  CHECK(root.find_children("Entities").size() == 1);
  REQUIRE(root.find_child("FileHeader") != nullptr);
  CHECK(*root.find_child("FileHeader")->find_attr("author") ==
        std::string(doc::kToolName) + " " + doc::kToolVersion);
  CHECK(root.find_child("FileHeader")->find_attr("sourceHash") != nullptr);
}

TEST_CASE("load(emit(d)) equals the XML projection; re-emit is byte-identical") {
  const doc::TargetDocument document = golden_document();
  const std::string bytes = xosc::emit(document);
  xosc::XoscDocument loaded = xosc::load(bytes);
  CHECK(loaded.root == xosc::build_tree(document));
  // emit . load . emit is a fixed point
  CHECK(xml::write_document(loaded.root) == bytes);
}

TEST_CASE("verify accepts emitted documents") {
  const std::string bytes = xosc::emit(golden_document());
  auto findings = xosc::verify(bytes);
  CHECK_FALSE(xosc::has_schema_errors(findings));
}

TEST_CASE("truncated file raises ReadError with a position") {
  const std::string bytes = xosc::emit(golden_document());
  const std::string truncated = bytes.substr(0, bytes.size() / 2);
  try {
    xosc::load(truncated);
    FAIL("expected ReadError");
  } catch (const ReadError& e) {
    CHECK(e.line() >= 1);
    CHECK(e.column() >= 1);
  }
}

TEST_CASE("unknown extension element is a warning, not an error") {
  std::string bytes = xosc::emit(golden_document());
  const std::string marker = "<Entities>";
  size_t pos = bytes.find(marker);
  REQUIRE(pos != std::string::npos);
  bytes.insert(pos, "<VendorExtension foo=\"1\"/>\n  ");
  auto findings = xosc::verify(bytes);
  bool warned = false;
  for (const auto& f : findings) {
    if (f.severity == xosc::FindingSeverity::Warning &&
        f.message.find("VendorExtension") != std::string::npos) {
      warned = true;
    }
  }
  CHECK(warned);
  CHECK_FALSE(xosc::has_schema_errors(findings));
}

TEST_CASE("missing required parts are errors") {
  auto findings = xosc::verify("<OpenSCENARIO/>");
  CHECK(xosc::has_schema_errors(findings));

  // dangling entityRef
  const char* dangling = R"(<OpenSCENARIO>
  <FileHeader revMajor="1" revMinor="1" date="d" description="x" author="a"/>
  <RoadNetwork><LogicFile filepath="maps/curve.map.json"/></RoadNetwork>
  <Entities>
    <ScenarioObject name="ego"><Vehicle name="car" vehicleCategory="car"><BoundingBox><Center x="0" y="0" z="0"/><Dimensions width="2" length="4" height="1.5"/></BoundingBox></Vehicle></ScenarioObject>
  </Entities>
  <Storyboard>
    <Init><Actions><Private entityRef="ghost"/></Actions></Init>
    <Story name="s"><Act name="a"><ManeuverGroup name="m" maximumExecutionCount="1"><Actors selectTriggeringEntities="false"><EntityRef entityRef="ego"/></Actors><Maneuver name="mv"><Event name="e" priority="parallel"><Action name="act"><PrivateAction><ControllerAction><ActivateControllerAction longitudinal="true" lateral="true"/></ControllerAction></PrivateAction></Action><StartTrigger><ConditionGroup><Condition name="c" delay="0.0" conditionEdge="rising"><ByValueCondition><SimulationTimeCondition value="0.0" rule="greaterOrEqual"/></ByValueCondition></Condition></ConditionGroup></StartTrigger></Event></Maneuver></ManeuverGroup><StartTrigger><ConditionGroup><Condition name="go" delay="0.0" conditionEdge="rising"><ByValueCondition><SimulationTimeCondition value="0.0" rule="greaterOrEqual"/></ByValueCondition></Condition></ConditionGroup></StartTrigger></Act></Story>
    <StopTrigger/>
  </Storyboard>
</OpenSCENARIO>)";
  auto f2 = xosc::verify(dangling);
  bool dangling_error = false;
  for (const auto& f : f2) {
    if (f.severity == xosc::FindingSeverity::Error &&
        f.message.find("ghost") != std::string::npos) {
      dangling_error = true;
    }
  }
  CHECK(dangling_error);
}

TEST_CASE("emit rejects documents with dangling actors") {
  doc::TargetDocument document = golden_document();
  document.stories.push_back({"phantom", {}});
  CHECK_THROWS_AS(xosc::emit(document), EmitError);
}

TEST_CASE("import reconstructs an executable document") {
  const doc::TargetDocument original = golden_document();
  const std::string bytes = xosc::emit(original);
  doc::TargetDocument imported =
      xosc::import_document(xosc::load(bytes), bundled_corpus());

  CHECK(imported.map_id == original.map_id);
  CHECK(imported.meta.source_hash == original.meta.source_hash);
  CHECK(imported.road_marker == original.road_marker);
  REQUIRE(imported.entities.size() == original.entities.size());
  REQUIRE(imported.ego() != nullptr);
  CHECK(imported.ego()->spawn.speed ==
        doctest::Approx(original.ego()->spawn.speed));

  // stories and actions survive with their parameters
  REQUIRE(imported.stories.size() == original.stories.size());
  for (size_t i = 0; i < imported.stories.size(); ++i) {
    const auto& got = imported.stories[i];
    const auto& want = original.stories[i];
    CHECK(got.actor_id == want.actor_id);
    REQUIRE(got.events.size() == want.events.size());
    for (size_t j = 0; j < got.events.size(); ++j) {
      CHECK(got.events[j].action == want.events[j].action);
      CHECK(got.events[j].trigger.kind == want.events[j].trigger.kind);
      for (const auto& [key, value] : want.events[j].params) {
        REQUIRE(got.events[j].params.count(key) == 1);
        CHECK(got.events[j].params.at(key) == doctest::Approx(value));
      }
    }
  }

  // routes reconstruct exactly
  REQUIRE(imported.routes.size() == original.routes.size());
  for (size_t i = 0; i < imported.routes.size(); ++i) {
    CHECK(imported.routes[i].actor_id == original.routes[i].actor_id);
    CHECK(imported.routes[i].route.lane_path == original.routes[i].route.lane_path);
    CHECK(imported.routes[i].route.start == original.routes[i].route.start);
    CHECK(imported.routes[i].route.end == original.routes[i].route.end);
  }

  // monitors with their values
  REQUIRE(imported.monitors.size() == original.monitors.size());
  for (size_t i = 0; i < imported.monitors.size(); ++i) {
    CHECK(imported.monitors[i].monitor_id == original.monitors[i].monitor_id);
    CHECK(imported.monitors[i].value == doctest::Approx(original.monitors[i].value));
  }

  // and a re-emit of the imported document round-trips byte-identically
  CHECK(xosc::emit(imported) == bytes);
}

TEST_CASE("import on a foreign map raises MapMismatchError") {
  std::string bytes = xosc::emit(golden_document());
  size_t pos = bytes.find("maps/intersection.map.json");
  REQUIRE(pos != std::string::npos);
  bytes.replace(pos, std::string("maps/intersection.map.json").size(),
                "maps/mars_colony.map.json");
  CHECK_THROWS_AS(xosc::import_document(xosc::load(bytes), bundled_corpus()),
                  MapMismatchError);
}
